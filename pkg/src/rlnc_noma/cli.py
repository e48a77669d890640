"""Command-line front end.

Exit status: 0 on success, 1 for usage or validation errors, 2 for I/O errors.
"""

import argparse
import math
import sys

from . import __version__, channel, phy, rlnc, sim
from .config import FIDELITIES, ConfigError, dumps, load_config

CSV_COLUMNS = (
    "alpha", "ber_noma_perfect", "ber_noma_imperfect", "ber_rlnc_perfect", "ber_rlnc_imperfect",
    "rate_noma_sum", "rate_oma_sum", "sinr_g1_db", "sinr_g2_db", "feasible", "ci_ber_noma", "ci_ber_rlnc",
)

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    v = float(v)
    return "nan" if math.isnan(v) else repr(v)


def format_csv(rows, config):
    """CSV text: '#' metadata lines, the column header, one line per alpha.

    ``ci_ber_noma``/``ci_ber_rlnc`` are the 95% half-widths for the
    configured SIC mode.
    """
    if not rows:
        raise ValueError("nothing to write")
    lines = [
        f"# rlnc-noma {__version__}",
        f"# seed: {config.seed}",
        f"# config: {dumps(config)}",
        ",".join(CSV_COLUMNS),
    ]
    sic = config.sic
    for r in rows:
        lines.append(",".join(_fmt(v) for v in (
            r.alpha, r.ber_noma_perfect, r.ber_noma_imperfect, r.ber_rlnc_perfect, r.ber_rlnc_imperfect,
            r.rate_noma_sum, r.rate_oma_sum, r.sinr_g1_db, r.sinr_g2_db, r.feasible,
            r.ci(f"noma_{sic}"), r.ci(f"rlnc_{sic}"),
        )))
    return "\n".join(lines) + "\n"


def emit_csv(rows, path, config):
    text = format_csv(rows, config)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def read_csv(path):
    """Parse a file written by ``emit_csv`` into a list of dicts (metadata skipped)."""
    import csv

    with open(path, newline="") as fh:
        body = [line for line in fh if not line.startswith("#")]
    out = []
    for rec in csv.DictReader(body):
        out.append({k: (v == "true") if k == "feasible" else float(v) for k, v in rec.items()})
    return out


def _add_sweep_args(p):
    p.add_argument("--config", help="JSON scenario file; absent keys take the defaults")
    p.add_argument("--out", default="-", help="CSV output path (default: stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--alpha-start", type=float)
    p.add_argument("--alpha-stop", type=float)
    p.add_argument("--alpha-step", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--sic", choices=phy.SIC_MODES)
    p.add_argument("--fidelity", choices=FIDELITIES)
    p.add_argument("--redundancy", type=int, metavar="N")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--sinr-convention", choices=phy.SINR_CONVENTIONS)
    p.add_argument("--plot", action="store_true",
                   help="also render a PNG next to the CSV (needs matplotlib)")


def build_parser():
    parser = _Parser(prog="rlnc-noma", description="RLNC over two-group NOMA in an indoor optical downlink")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_sweep_args(sub.add_parser("sweep-ber", help="average BER and sum rate versus alpha"))
    _add_sweep_args(sub.add_parser("sweep-rate", help="ergodic sum rate versus alpha"))

    p = sub.add_parser("decode-prob", help="probability that N random coded packets decode K")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, default=256)

    p = sub.add_parser("link-budget", help="LoS gain and SNR at a radial offset from the LED axis")
    p.add_argument("--config")
    p.add_argument("--radius", type=float, default=0.0, help="horizontal distance from the LED axis (m)")
    p.add_argument("--alpha", type=float, help="also report the NOMA SINRs at this power split")
    return parser


def _overrides(args):
    return {
        "seed": args.seed,
        "alpha_start": args.alpha_start,
        "alpha_stop": args.alpha_stop,
        "alpha_step": args.alpha_step,
        "trials": args.trials,
        "sic": args.sic,
        "fidelity": args.fidelity,
        "redundancy": args.redundancy,
        "epsilon": args.epsilon,
        "sinr_convention": args.sinr_convention,
    }


def _progress(row):
    print(f"alpha={row.alpha:.4g} ber_noma={row.ber_noma_imperfect:.3e} ber_rlnc={row.ber_rlnc_imperfect:.3e} "
          f"rate_noma={row.rate_noma_sum:.3f} rate_oma={row.rate_oma_sum:.3f}", file=sys.stderr)


def cmd_sweep(args, kinds):
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    if args.plot and args.out in (None, "-"):
        raise UsageError("--plot needs --out")
    config = load_config(args.config, _overrides(args))
    rows = sim.run_sweep(config, kinds=kinds, workers=args.workers, progress=_progress)
    emit_csv(rows, args.out, config)
    if args.plot:
        from .plotting import plot_sweep

        plot_sweep(rows, figure_path(args.out), kinds=kinds)
    return EXIT_OK


def figure_path(csv_path):
    stem = csv_path[:-4] if csv_path.endswith(".csv") else csv_path
    return stem + ".png"


def cmd_decode_prob(args):
    if args.k < 1 or args.n < 0 or args.q < 2:
        raise UsageError("need --k >= 1, --n >= 0, --q >= 2")
    print(f"{rlnc.full_rank_probability(args.k, args.n, args.q):.6f}")
    return EXIT_OK


def cmd_link_budget(args):
    config = load_config(args.config)
    g, led, pd = config.geometry, config.led, config.pd
    xy = (g.led_position[0] + args.radius, g.led_position[1])
    h = channel.los_gain(g, led, pd, xy)
    gamma = channel.link_snr(h, led.power, pd, config.noise_psd, config.bandwidth)
    print(f"lambertian_order {led.m:.6g}")
    print(f"footprint_radius_m {channel.footprint_radius(g, pd):.6g}")
    print(f"gain {h:.6e}")
    print(f"snr {gamma:.6g}")
    print(f"snr_db {10 * math.log10(gamma) if gamma > 0 else -math.inf:.4f}")
    if args.alpha is not None:
        phy.check_alpha(args.alpha)
        s1 = float(phy.sinr_group1(args.alpha, gamma, config.sinr_convention))
        s2 = float(phy.sinr_group2(args.alpha, gamma, config.residual_fraction, config.sinr_convention))
        print(f"sinr_weak {s1:.6g}")
        print(f"sinr_strong {s2:.6g}")
    return EXIT_OK


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.command == "sweep-ber":
            return cmd_sweep(args, (sim.BER, sim.RATE))
        if args.command == "sweep-rate":
            return cmd_sweep(args, (sim.RATE,))
        if args.command == "decode-prob":
            return cmd_decode_prob(args)
        return cmd_link_budget(args)
    except (UsageError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
