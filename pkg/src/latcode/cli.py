"""Command line entry point.

Every subcommand takes a key-value config file (see README for keys) plus a
few common overrides, writes a CSV of results and a JSON manifest recording
the exact configuration, and exits nonzero on configuration errors.
"""

import argparse
import sys

from .sim import RUNNERS, ConfigError, SimConfig, parse_config, run


def _build_parser():
    p = argparse.ArgumentParser(
        prog="latcode",
        description="Lattice codes with embedded CRC self error-detection: "
        "simulation, bounds, and CRC optimization.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    descriptions = {
        "simulate-su": "single-user AWGN simulation (one-shot, retry, or genie mode)",
        "search-alpha": "offline search for the scaling-factor candidate list",
        "simulate-cf": "two-user compute-forward relay simulation",
        "bound": "analytic decoding error bound and effective-radius estimate",
        "pud": "undetected-error probability table over CRC lengths",
        "optimize-crc": "CRC length selection from a retry simulation sweep",
    }
    for name in RUNNERS:
        sp = sub.add_parser(name, help=descriptions[name])
        sp.add_argument("config", help="key = value config file")
        sp.add_argument("--out", help="output prefix (default from config or command name)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
    return p


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        raw = parse_config(args.config)
        for item in args.set:
            if "=" not in item:
                raise ConfigError("--set expects KEY=VALUE, got '%s'" % item)
            k, v = item.split("=", 1)
            raw[k.strip()] = v.strip()
        csv_path, man_path = run(args.command, SimConfig(raw), out_prefix=args.out)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    print(csv_path)
    print(man_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
