"""
Command-line front end.

    qudit-rsp equatorial --phases 0,1.2,2.5 --mode exhaustive
    qudit-rsp real-min --coeffs 0.6,0,0.8 --mode sample --trials 100000 --seed 7
    qudit-rsp separable --spec target.json --policy case4 --us-catalog permutations
    qudit-rsp run --spec configs/equatorial_s3.json
    qudit-rsp catalog 8

Exit codes: 0 ok, 2 configuration error, 3 target not preparable,
4 internal invariant violated.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigError, InvariantViolation, NotPreparableError
from .experiment import FORMATS, MODES, PROTOCOLS, ExperimentConfig, emit_report, run_experiment
from .realspace import catalog
from .separable import POLICIES
from .states import QuditSpec, qudit_from_dict

EXIT_OK, EXIT_CONFIG, EXIT_NOT_PREPARABLE, EXIT_INVARIANT = 0, 2, 3, 4
SEED_ENV = "QUDIT_RSP_SEED"

# experiment-file keys and the argparse destinations they correspond to
FILE_KEYS = {
    "protocol": "protocol",
    "pairs": "pairs",
    "mode": "mode",
    "trials": "trials",
    "seed": "seed",
    "policy": "policy",
    "us_catalog": "us_catalog",
    "max_groupings": "max_groupings",
    "factored": "factored",
}
DEFAULTS = {
    "mode": "exhaustive",
    "trials": 10_000,
    "policy": "case1",
    "us_catalog": "identity",
    "factored": False,
}


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_experiment_flags(p: argparse.ArgumentParser, *, with_protocol: bool) -> None:
    if with_protocol:
        p.add_argument("--protocol", choices=PROTOCOLS)
    p.add_argument("--spec", help="JSON file with a qudit target or a full experiment config")
    p.add_argument("--s", type=int, help="qudit dimension (checked against the target)")
    p.add_argument("--phases", type=_floats, help="equatorial phases in radians, first must be 0")
    p.add_argument("--coeffs", type=_floats, help="real coefficients")
    p.add_argument("--pairs", "-L", dest="pairs", type=int, help="number of EPR pairs")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--policy", choices=POLICIES, help="separable grouping policy")
    p.add_argument("--us-catalog", dest="us_catalog", choices=("identity", "permutations"))
    p.add_argument("--max-groupings", dest="max_groupings", type=int,
                   help="cap on groupings tried by case4")
    p.add_argument("--factored", action="store_const", const=True, default=None,
                   help="real-min: Bob applies product corrections where available")
    p.add_argument("--workers", type=int, default=None,
                   help="Monte Carlo worker processes (default: all CPUs)")
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--timing", action="store_true", help="include wall_time (breaks byte-stability)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qudit-rsp",
        description="Remote preparation of qudits over EPR pairs: exhaustive and Monte Carlo runs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in PROTOCOLS:
        _add_experiment_flags(sub.add_parser(name, help=f"run the {name} protocol"),
                              with_protocol=False)
    _add_experiment_flags(sub.add_parser("run", help="protocol taken from --protocol or the spec file"),
                          with_protocol=True)
    cat = sub.add_parser("catalog", help="dump the real operator catalog as JSON")
    cat.add_argument("dim", type=int, choices=(1, 2, 4, 8))
    cat.add_argument("--out")
    return parser


def _merge(name: str, flag, file_value):
    if flag is not None and file_value is not None and flag != file_value:
        raise ConfigError(f"{name} given as {flag!r} on the command line but {file_value!r} in the spec file")
    return flag if flag is not None else file_value


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    file_cfg: dict = {}
    file_target = None
    if args.spec:
        try:
            with open(args.spec) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read spec file {args.spec}: {exc}") from None
        if "kind" in data:
            file_target = qudit_from_dict(data)
        else:
            unknown = set(data) - set(FILE_KEYS) - {"target"}
            if unknown:
                raise ConfigError(f"unknown keys in spec file: {sorted(unknown)}")
            if "target" in data:
                file_target = qudit_from_dict(data["target"])
            file_cfg = {k: data[k] for k in FILE_KEYS if k in data}

    protocol = args.command if args.command in PROTOCOLS else getattr(args, "protocol", None)
    if args.command in PROTOCOLS and "protocol" in file_cfg and file_cfg["protocol"] != protocol:
        raise ConfigError(f"spec file is for protocol {file_cfg['protocol']!r}, not {protocol!r}")
    protocol = _merge("protocol", protocol, file_cfg.get("protocol"))
    if protocol is None:
        raise ConfigError("no protocol given (use a subcommand, --protocol, or a spec file key)")

    inline_target = None
    if args.phases is not None and args.coeffs is not None:
        raise ConfigError("give either --phases or --coeffs, not both")
    if args.phases is not None:
        inline_target = QuditSpec.equatorial(args.phases)
    elif args.coeffs is not None:
        inline_target = QuditSpec.real(args.coeffs)
    if inline_target is not None and file_target is not None:
        raise ConfigError("target given both inline and in the spec file")
    target = inline_target or file_target
    if target is None:
        raise ConfigError("no target given (use --phases, --coeffs or --spec)")
    if args.s is not None and args.s != target.s:
        raise ConfigError(f"--s {args.s} does not match a target with {target.s} amplitudes")

    values = {}
    for key, dest in FILE_KEYS.items():
        if key == "protocol":
            continue
        values[key] = _merge(key, getattr(args, dest), file_cfg.get(key))
        if values[key] is None:
            values[key] = DEFAULTS.get(key)
    if values["seed"] is None:
        env = os.environ.get(SEED_ENV)
        try:
            values["seed"] = int(env) if env else 0
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return ExperimentConfig(protocol=protocol, target=target, workers=args.workers, **values)


def _write(data: bytes, out: str | None) -> None:
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        with open(out, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise ConfigError(f"cannot write {out}: {exc}") from None


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "catalog":
            data = json.dumps(catalog(args.dim).to_dict(), indent=2) + "\n"
            _write(data.encode(), args.out)
            return EXIT_OK
        cfg = config_from_args(args)
        report = run_experiment(cfg)
        _write(emit_report(report, args.format, timing=args.timing), args.out)
        return EXIT_OK
    except NotPreparableError as exc:
        failure = {"status": "not_preparable", "message": str(exc)}
        print(json.dumps(failure, sort_keys=True))
        return EXIT_NOT_PREPARABLE
    except InvariantViolation as exc:
        print(f"qudit-rsp: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConfigError, ValueError) as exc:
        print(f"qudit-rsp: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
