"""Command-line front end.

Subcommands:

    dampwave simulate <config>            run one configuration
    dampwave sweep <config>               run a parameter sweep
    dampwave verify <suite>               spectrum | rescaling | lyapunov | inequalities
    dampwave norms <states.npz> <spec>... norm series from a stored trajectory

Exit codes: 0 success, 1 configuration error, 2 acceptance failure.  The
output directory is --outdir, else $DAMPWAVE_OUTDIR, else the working
directory.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import RunConfig, SweepConfig, parse_config, parse_norm_request
from .errors import BlowupDetected, ConfigError
from .experiments import OUTPUT_DIR_ENV, load_states, run, sweep, verify
from .functionals import besov_series

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ACCEPTANCE = 2


def _read_config(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(path, f"cannot read config: {exc}") from exc
    return parse_config(text)


def _cmd_simulate(args) -> int:
    cfg = RunConfig.from_mapping(_read_config(args.config))
    try:
        result = run(cfg, args.outdir)
    except BlowupDetected as exc:
        print(f"blow-up detected at t={exc.time:.6g}; partial artifacts flushed",
              file=sys.stderr)
        return EXIT_ACCEPTANCE
    for kind, path in sorted(result.paths.items()):
        print(f"{kind}: {path}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = SweepConfig.from_mapping(_read_config(args.config))
    summary = sweep(cfg, args.outdir)
    print(f"table: {summary['table']}")
    for name, value in sorted(summary["regressions"].items()):
        print(f"{name} = {value:.4f}")
    failed = [r for r in summary["rows"] if r["status"] != "ok"]
    for r in failed:
        print(f"cell {r[cfg.sweep.axis]}: {r['status']}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_ACCEPTANCE


def _cmd_verify(args) -> int:
    report = verify(args.suite, args.outdir)
    for check in report["checks"]:
        mark = "pass" if check["passed"] else "FAIL"
        print(f"[{mark}] {check['name']}: {check['value']} (target {check['target']})")
    print(f"suite {args.suite}: {'pass' if report['passed'] else 'FAIL'}")
    return EXIT_OK if report["passed"] else EXIT_ACCEPTANCE


def _cmd_norms(args) -> int:
    traj, lam = load_states(args.states)
    requests = [parse_norm_request(s) for s in args.normspec]
    component = {"uv": "pair", "u": "first", "v": "second", "z": "damped"}
    series = [
        besov_series(traj, r.spec, side=r.side, J=r.J,
                     component=component[r.component], lam=lam, label=r.label())
        for r in requests
    ]
    print(",".join(["time"] + [s.label for s in series]))
    for i, t in enumerate(traj.times):
        print(",".join([repr(float(t))] + [repr(float(s.values[i])) for s in series]))
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dampwave",
        description="Pseudospectral runs and dyadic-frequency analysis of 1D "
                    "damped hyperbolic systems",
    )
    parser.add_argument(
        "--outdir",
        default=None,
        help=f"artifact directory (default: ${OUTPUT_DIR_ENV} or '.')",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one configuration")
    p_sim.add_argument("config")
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("config")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_ver = sub.add_parser("verify", help="run a verification suite")
    p_ver.add_argument(
        "suite", choices=["spectrum", "rescaling", "lyapunov", "inequalities"]
    )
    p_ver.set_defaults(func=_cmd_verify)

    p_norms = sub.add_parser("norms", help="norm series from stored states")
    p_norms.add_argument("states")
    p_norms.add_argument("normspec", nargs="+")
    p_norms.set_defaults(func=_cmd_norms)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
