"""Scenario configuration: defaults, validation and the flat JSON key schema."""

import json
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .channel import LedParams, PdParams, RoomGeometry
from .phy import SIC_MODES, SINR_CONVENTIONS

BITEXACT = "bitexact"
SEMIANALYTIC = "semianalytic"
FIDELITIES = (BITEXACT, SEMIANALYTIC)


class ConfigError(ValueError):
    """Invalid scenario configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ScenarioConfig:
    geometry: RoomGeometry = field(default_factory=RoomGeometry)
    led: LedParams = field(default_factory=LedParams)
    pd: PdParams = field(default_factory=PdParams)
    users_per_group: int = 5
    noise_psd: float = 1e-21
    bandwidth: float = 20e6
    generation_size: int = 10
    payload_length: int = 128
    redundancy: int = 12
    alpha_start: float = 0.05
    alpha_stop: float = 0.45
    alpha_step: float = 0.05
    trials: int = 1000
    seed: int = 0
    sic: str = "imperfect"
    epsilon: float = 0.01
    fidelity: str = SEMIANALYTIC
    min_throughput: float = 0.5
    sinr_convention: str = "amplitude"

    def __post_init__(self):
        validate(self)

    @property
    def K(self):
        return self.generation_size

    @property
    def N(self):
        return self.redundancy

    @property
    def L(self):
        return self.payload_length

    @property
    def sigma(self):
        return math.sqrt(self.noise_psd * self.bandwidth)

    @property
    def residual_fraction(self):
        """Imperfect-SIC residual used by the rate path (0 under perfect SIC)."""
        return 0.0 if self.sic == "perfect" else self.epsilon

    def alphas(self):
        n = int(math.floor((self.alpha_stop - self.alpha_start) / self.alpha_step + 1e-9)) + 1
        return [round(self.alpha_start + k * self.alpha_step, 12) for k in range(n)]

    def replace(self, **changes):
        return replace(self, **changes)


# flat file key -> (parameter block, attribute)
_BLOCK_KEYS = {
    "room_size": ("geometry", "room"),
    "led_position": ("geometry", "led_position"),
    "user_height": ("geometry", "user_height"),
    "cell_size": ("geometry", "cell_radius"),
    "led_power": ("led", "power"),
    "half_power_angle": ("led", "half_angle"),
    "pd_area": ("pd", "area"),
    "fov": ("pd", "fov"),
    "responsivity": ("pd", "responsivity"),
    "filter_gain": ("pd", "filter_gain"),
    "concentrator_gain": ("pd", "concentrator_gain"),
}
_TOP_KEYS = {f.name for f in fields(ScenarioConfig)} - {"geometry", "led", "pd"}
KEYS = tuple(_BLOCK_KEYS) + tuple(sorted(_TOP_KEYS))

_INT_KEYS = {"users_per_group", "generation_size", "payload_length", "redundancy", "trials", "seed"}
_STR_KEYS = {"sic": SIC_MODES, "fidelity": FIDELITIES, "sinr_convention": SINR_CONVENTIONS}


def validate(cfg):
    def need(cond, key, msg):
        if not cond:
            raise ConfigError(key, msg)

    need(cfg.users_per_group >= 1, "users_per_group", "must be >= 1")
    need(cfg.generation_size >= 1, "generation_size", "must be >= 1")
    need(cfg.payload_length >= 1, "payload_length", "must be >= 1")
    need(cfg.redundancy >= cfg.generation_size, "redundancy",
         f"N < K (N={cfg.redundancy}, K={cfg.generation_size})")
    need(cfg.trials >= 1, "trials", "must be >= 1")
    need(cfg.seed >= 0, "seed", "must be non-negative")
    need(cfg.noise_psd > 0, "noise_psd", "must be positive")
    need(cfg.bandwidth > 0, "bandwidth", "must be positive")
    need(cfg.alpha_step > 0, "alpha_step", "must be positive")
    need(0 < cfg.alpha_start < 0.5, "alpha_start", "must lie in (0, 0.5)")
    need(0 < cfg.alpha_stop < 0.5, "alpha_stop", "must lie in (0, 0.5)")
    need(cfg.alpha_start <= cfg.alpha_stop, "alpha_stop", "must be >= alpha_start")
    need(0 <= cfg.epsilon <= 1, "epsilon", "must lie in [0, 1]")
    need(cfg.min_throughput >= 0, "min_throughput", "must be non-negative")
    for key, allowed in _STR_KEYS.items():
        need(getattr(cfg, key) in allowed, key, f"must be one of {', '.join(allowed)}")


def to_flat(cfg):
    """Flat key/value view matching the config-file schema."""
    out = {}
    for key, (block, attr) in _BLOCK_KEYS.items():
        v = getattr(getattr(cfg, block), attr)
        if key == "cell_size":
            v = 2 * v  # the file states the cell diameter
        out[key] = list(v) if isinstance(v, tuple) else v
    for key in sorted(_TOP_KEYS):
        out[key] = getattr(cfg, key)
    return out


def _coerce(key, value):
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not float(value).is_integer():
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return int(value)
    if key in _STR_KEYS:
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    if key in ("room_size", "led_position"):
        if not isinstance(value, (list, tuple)) or len(value) != 3:
            raise ConfigError(key, "expected a list of three numbers")
        return tuple(float(v) for v in value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)


def from_flat(values):
    blocks = {"geometry": {}, "led": {}, "pd": {}}
    top = {}
    for key, value in values.items():
        if key not in _BLOCK_KEYS and key not in _TOP_KEYS:
            raise ConfigError(key, "unknown key")
        value = _coerce(key, value)
        if key == "cell_size":
            value = value / 2
        if key in _BLOCK_KEYS:
            block, attr = _BLOCK_KEYS[key]
            blocks[block][attr] = value
        else:
            top[key] = value
    built = {}
    for block, cls in (("geometry", RoomGeometry), ("led", LedParams), ("pd", PdParams)):
        try:
            built[block] = cls(**blocks[block])
        except ValueError as exc:
            given = [k for k, (b, _) in _BLOCK_KEYS.items() if b == block and k in values]
            raise ConfigError(given[0] if given else block, str(exc)) from exc
    return ScenarioConfig(**built, **top)


def load_config(path=None, overrides=None):
    """Read a JSON scenario file (absent keys take defaults) and apply overrides.

    Raises ``OSError`` for unreadable files and ``ConfigError`` for schema
    violations.
    """
    values = {}
    if path is not None:
        with open(path) as fh:
            text = fh.read()
        try:
            values = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"not valid JSON ({exc})") from exc
        if not isinstance(values, dict):
            raise ConfigError("config", "top level must be an object")
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return from_flat(values)


def dumps(cfg):
    return json.dumps(to_flat(cfg), sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o))
