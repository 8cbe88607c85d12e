"""
Duffing-Van der Pol Survey - Main Application
Command-line entry point of the survey toolkit

Usage:
    python main.py [global flags] <command> [command flags]
    python main.py --repro fig8b
"""

import argparse
import sys

import config
from modules import __version__
from modules.errors import ConfigError, SurveyError
from modules.survey import COMMANDS, PRESETS, build_config, run


def print_banner():
    """Print the welcome banner"""
    banner = f"""
    ==========================================================

        DUFFING-VAN DER POL SURVEY v{__version__}

        x'' - x + x^3 = eps [(p1 + p2 x - x^2) x' + p3 sin(p4 t)]

    ==========================================================
    """
    print(banner)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Limit cycles, resonance zones and separatrix splitting of the asymmetric Duffing-Van der Pol equation",
    )
    parser.add_argument("--config", dest="config_file", metavar="FILE", help="flat key = value run configuration")
    parser.add_argument("--out", dest="out_dir", metavar="DIR", help=f"output directory (default {config.OUTPUT_DIR})")
    parser.add_argument("--workers", type=int, metavar="N", help=f"worker processes (default ${config.WORKERS_ENV_VAR} or {config.DEFAULT_WORKERS})")
    parser.add_argument("--repro", metavar="NAME", choices=sorted(PRESETS), help="reproduction preset")
    parser.add_argument("--no-timestamp", action="store_true", help="omit the date from SVG metadata")
    parser.add_argument("--verbose", action="store_true", help="print [Component] diagnostics")
    parser.add_argument("--set", dest="settings", action="append", default=[], metavar="KEY=VALUE", help="override any configuration key")
    parser.add_argument("--rtol", type=float, help="relative tolerance of sweep integrations")
    parser.add_argument("--atol", type=float, help="absolute tolerance of sweep integrations")

    sub = parser.add_subparsers(dest="command", metavar="command")
    helps = {
        "census-plane": "cycle census on a (p1, p2) grid",
        "cycles": "limit cycles at one point (or at every domain probe)",
        "resonance": "resonance zones and their classification",
        "melnikov": "Melnikov mean, amplitude and thresholds",
        "poincare": "stroboscopic iterates of a line of seeds",
        "separatrix": "saddle separatrices of the stroboscopic map",
        "portrait": "flow trajectories from a line of seeds",
        "diagram": "(p2, p3) bifurcation diagram",
    }
    commands = {name: sub.add_parser(name, help=helps[name]) for name in COMMANDS}

    for cmd in commands.values():
        for name in ("epsilon", "p1", "p2", "p3", "p4"):
            cmd.add_argument(f"--{name}", type=float)

    for name in ("census-plane", "diagram"):
        cmd = commands[name]
        cmd.add_argument("--p1-range", nargs=2, type=float, metavar=("MIN", "MAX"))
        cmd.add_argument("--p2-range", nargs=2, type=float, metavar=("MIN", "MAX"))
        cmd.add_argument("--p3-range", nargs=2, type=float, metavar=("MIN", "MAX"))
        cmd.add_argument("--n-p1", type=int)
        cmd.add_argument("--n-p2", type=int)
        cmd.add_argument("--n-p3", type=int)

    commands["cycles"].add_argument("--probes", action="store_true", default=None, help="one point per published domain")

    resonance = commands["resonance"]
    resonance.add_argument("--domains", help="comma list of G1_PLUS, G1_MINUS, G2")
    resonance.add_argument("--p-max", type=int)
    resonance.add_argument("--q-max", type=int)
    resonance.add_argument("--portrait", action="store_true", default=None, help="also sample the pendulum models")

    for name in ("poincare", "portrait"):
        cmd = commands[name]
        cmd.add_argument("--variant", choices=["ORIGINAL", "TRANSFORMED"])
        cmd.add_argument("--n-seeds", type=int)
        cmd.add_argument("--seed-range", nargs=2, type=float, metavar=("XMIN", "XMAX"))
    commands["poincare"].add_argument("--iterates", type=int)
    commands["poincare"].add_argument("--skip", type=int)
    commands["portrait"].add_argument("--t-end", type=float)

    commands["separatrix"].add_argument("--budget", type=float, help="arclength grown per branch")

    diagram = commands["diagram"]
    diagram.add_argument("--families", help="comma list of right, left, right_to_left, left_to_right")
    diagram.add_argument("--numeric", action="store_true", default=None, help="trace tangency curves numerically")
    diagram.add_argument("--no-analytic", dest="analytic", action="store_false", default=None)
    diagram.add_argument("--connections", action="store_true", default=None, help="bisect autonomous big-loop points")
    return parser


_RANGES = {"p1_range": ("p1_min", "p1_max"), "p2_range": ("p2_min", "p2_max"),
           "p3_range": ("p3_min", "p3_max"), "seed_range": ("seed_x_min", "seed_x_max")}

_GLOBAL = {"config_file", "workers", "repro", "no_timestamp", "verbose", "settings", "command"}


def collect_overrides(args: argparse.Namespace) -> dict:
    """Command-line values that override the preset and the config file"""
    overrides = {}
    for key, value in vars(args).items():
        if key in _GLOBAL or value is None:
            continue
        if key in _RANGES:
            overrides[_RANGES[key][0]], overrides[_RANGES[key][1]] = value
        else:
            overrides[key] = value
    if args.no_timestamp:
        overrides["timestamp"] = False
    for item in args.settings:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip().replace("-", "_")] = value.strip()
    return overrides


def print_summary(result) -> None:
    print("\n" + "=" * 60)
    print(f"RESULT: {result.command}")
    print("=" * 60)
    print(f"  - Records: {result.cell_count}")
    for record in result.records[:12]:
        print("  - " + ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in record.items()))
    if result.cell_count > 12:
        print(f"  ... {result.cell_count - 12} more")
    print(f"\nFiles ({len(result.files)}):")
    for path in result.files:
        print(f"  {path}")
    print(f"\nElapsed: {result.provenance['elapsed_s']:.2f} s")
    print("=" * 60)


def main(argv=None) -> int:
    """Main function"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None and args.repro is None:
        parser.error("a command or --repro is required")

    print_banner()
    if args.verbose:
        config.DEBUG = True

    # Validate config
    print("\nValidating configuration...")
    if not config.validate_config():
        print("\n[X] Configuration validation failed!")
        return config.EXIT_CONFIG_ERROR
    try:
        cfg = build_config(
            command=args.command,
            config_file=args.config_file,
            overrides=collect_overrides(args),
            repro=args.repro,
            workers=args.workers,
        )
    except ConfigError as e:
        print(f"\n[X] ERROR: {e}")
        return config.EXIT_CONFIG_ERROR
    print(f"[OK] Configuration valid ({cfg.command}, {cfg.workers} worker(s))")

    # Run
    print("\nRunning...")
    try:
        result = run(cfg)
    except SurveyError as e:
        print(f"\n[X] ERROR: {type(e).__name__}: {e}")
        print("Partial outputs were kept and marked (see PARTIAL in the output directory).")
        return config.EXIT_NUMERIC_FAILURE

    print_summary(result)
    if result.partial:
        print("\n[X] Run finished with partial results")
        return config.EXIT_NUMERIC_FAILURE
    print("\n[OK] Run complete")
    return config.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
