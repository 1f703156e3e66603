"""Command line entry point.

    mimopred simulate --preset table5 --scheduler mpfs --seed 42 --out out/
    mimopred simulate --config run.json --set horizon=20000 --runs 4 --out out/
    mimopred presets

A config file is a JSON object with any ScenarioConfig field plus an
optional ``"preset"`` key naming the base preset. Precedence, lowest
first: preset, config file, ``--set`` pairs, dedicated flags.
"""
import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import ConfigurationError
from .sim import PRESETS, SCHEDULERS, ScenarioConfig, preset, run, write_outputs

log = logging.getLogger("mimopred")


def _parse_set(pairs):
    out = {}
    for item in pairs:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigurationError(f"--set expects key=value, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def build_config(args):
    data = {}
    base_name = args.preset
    if args.config:
        data = json.loads(Path(args.config).read_text())
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object")
        base_name = base_name or data.pop("preset", None)
        data.pop("preset", None)
    base = preset(base_name) if base_name else ScenarioConfig()
    data.update(_parse_set(args.set))
    for key in ("scheduler", "predictor", "seed", "horizon"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    return ScenarioConfig.from_dict(data, base)


def _one(cfg, out):
    record = run(cfg)
    summary = write_outputs(record, out, cfg)
    return str(out), summary["sum_throughput"], summary["sum_log_throughput"]


def simulate(args):
    cfg = build_config(args)
    cfg.validate()
    out = Path(args.out)
    if args.runs == 1:
        jobs = [(cfg, out)]
    else:
        jobs = [(cfg.replace(seed=cfg.seed + i), out / f"seed_{cfg.seed + i}")
                for i in range(args.runs)]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_one, *zip(*jobs)))
    else:
        results = [_one(c, o) for c, o in jobs]
    for path, s, sl in results:
        print(f"{path}: sum T_k = {s:.4f}, sum log T_k = {sl:.4f}")
    return 0


def _parser():
    p = argparse.ArgumentParser(prog="mimopred", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="run one or more simulations")
    s.add_argument("--preset", choices=sorted(PRESETS))
    s.add_argument("--config", help="JSON config file")
    s.add_argument("--scheduler", choices=SCHEDULERS)
    s.add_argument("--predictor", choices=("esprit", "wiener"))
    s.add_argument("--seed", type=int)
    s.add_argument("--horizon", type=int, help="horizon in OFDM symbols")
    s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config field (JSON value)")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--runs", type=int, default=1,
                   help="consecutive seeds to run, one subdirectory each")
    s.add_argument("--jobs", type=int, default=1, help="parallel processes")
    sub.add_parser("presets", help="list preset names")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "presets":
            for name in sorted(PRESETS):
                print(name)
            return 0
        if args.runs < 1 or args.jobs < 1:
            raise ConfigurationError("--runs and --jobs must be >= 1")
        return simulate(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def simulate_main(argv=None):
    """Entry point of the standalone ``simulate`` command."""
    argv = sys.argv[1:] if argv is None else list(argv)
    return main(["simulate"] + argv)


if __name__ == "__main__":
    sys.exit(main())
