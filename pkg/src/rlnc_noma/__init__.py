"""Random linear network coding over two-group NOMA in an indoor optical downlink."""

__version__ = "0.1.0"
