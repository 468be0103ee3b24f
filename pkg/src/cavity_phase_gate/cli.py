"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 config error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ConfigError, GateSimError

log = logging.getLogger("cavity_phase_gate")

COMMAND_MODES = {
    "single": "single",
    "fig2": "fig2-sweep",
    "fig3": "fig3-curve",
    "validate": "validate",
    "converge": "converge",
}


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavity-phase-gate", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*COMMAND_MODES, "units"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--jobs", type=int, help="worker processes for sweeps")
        p.add_argument("--seed", type=int, help="reserved; no stochastic components")
        p.add_argument("--verbose", action="store_true")
        if name == "fig2":
            p.add_argument("--surface-out", help="also write the fidelity matrix CSV here")
        if name == "validate":
            p.add_argument("--quick", action="store_true", help="skip master-equation checks")
        if name == "units":
            p.add_argument("--mu1", type=float, help="μ₁ in rad/s (default 2π·85 MHz)")
            p.add_argument("--omega-c", type=float, help="ω_c in rad/s (default 2π·5.09 GHz)")
            p.add_argument("--kappa", type=float, help="κ in units of μ₁ (default 0.01)")
            p.add_argument("--gamma", type=float, help="γ in units of μ₁, for a decoherence time")
    return parser


def _config(args, mode: str):
    from .experiments import RunConfig, load_config

    overrides = {"mode": mode, "jobs": args.jobs, "seed": args.seed}
    if args.config:
        return load_config(args.config, **overrides)
    return RunConfig.from_dict({k: v for k, v in overrides.items() if v is not None})


def run(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    from . import experiments as ex

    try:
        if args.command == "units":
            kw = {k: v for k, v in (("mu1_rad_s", args.mu1), ("omega_c_rad_s", args.omega_c),
                                     ("kappa", args.kappa), ("gamma", args.gamma)) if v is not None}
            rep = ex.physical_units_report(**kw)
            checks = rep.checks()
            payload = {"values": rep.__dict__, "checks": checks}
            _emit(json.dumps(payload, indent=2) + "\n", args.out)
            return 0 if all(c["status"] == "pass" for c in checks) else 1

        mode = COMMAND_MODES[args.command]
        if mode == "validate":
            try:
                cfg = _config(args, mode)
            except ConfigError as exc:
                report = ex.ValidationReport(
                    [ex._check("config", str(exc), "valid config", False, "experiments-cli")], {})
            else:
                report = ex.run_validation_suite(cfg, include_slow=not args.quick)
            _emit(report.to_json() + "\n", args.out)
            return 0 if report.passed else 1

        cfg = _config(args, mode)
        log.info("running %s", mode)
        if mode == "fig2-sweep":
            result = ex.run_fig2_sweep(cfg)
            _emit(result.to_csv(), args.out or cfg.out)
            surface = args.surface_out or cfg.surface_out
            if surface:
                _emit(ex.fig2_surface_csv(result), surface)
        elif mode == "fig3-curve":
            _emit(ex.run_fig3_curve(cfg).to_csv(), args.out or cfg.out)
        elif mode == "converge":
            _emit(json.dumps(ex.run_convergence(cfg), indent=2) + "\n", args.out or cfg.out)
        else:
            _emit(json.dumps(ex.run_single(cfg), indent=2) + "\n", args.out or cfg.out)
        return 0
    except GateSimError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
