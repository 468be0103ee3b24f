"""Reproduction harness: run configuration, parameter sweeps, validation, units.

Sweeps evaluate grid points in a bounded process pool and always emit rows
in lexicographic grid order, so the CSV bytes do not depend on ``jobs``.
"""
from __future__ import annotations

import dataclasses
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Iterable

import numpy as np

from . import __version__
from .errors import ConfigError, GateSimError, ParameterError
from .model import PAPER_DELTA1, PAPER_DELTA_CAP, PAPER_FG_RATIO, PAPER_KAPPA, SystemParams, derive, matched_mu

MODES = ("single", "fig2-sweep", "fig3-curve", "validate", "converge")

PAPER_MU1_RAD_S = 2 * math.pi * 85e6
PAPER_OMEGA_C_RAD_S = 2 * math.pi * 5.09e9
PAPER_Q = 5.97e3

DEFAULT_GAMMA_GRID = [0.0, 5e-5, 1e-4, 2e-4, 5e-4, 1e-3]


@dataclass
class RunConfig:
    """Flat run configuration; ``mu = None`` means "use the matched coupling"."""

    mode: str = "single"
    n_qutrits: int = 3
    mu1: float = 1.0
    mu: float | None = None
    delta1: float = PAPER_DELTA1
    delta_cap: float = PAPER_DELTA_CAP
    kappa: float = 0.0
    gamma_fe: float = 0.0
    gamma_fg: float = 0.0
    gamma_eg: float = 0.0
    gamma_phi_f: float = 0.0
    gamma_phi_e: float = 0.0
    fock_cutoff: int = 5
    delta1_grid: list[float] = field(default_factory=list)
    delta_small_grid: list[float] = field(default_factory=list)
    gamma_grid: list[float] = field(default_factory=lambda: list(DEFAULT_GAMMA_GRID))
    fig3_kappa: float = PAPER_KAPPA
    fig3_fg_ratio: float = PAPER_FG_RATIO
    input_state: str = "paper"
    rtol: float | None = None
    out: str | None = None
    surface_out: str | None = None
    jobs: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if any(g < 0 for g in self.gamma_grid):
            raise ConfigError("gamma grid values must be non-negative")
        if self.input_state != "paper" and (
            set(self.input_state) - {"0", "1"} or len(self.input_state) != self.n_qutrits
        ):
            raise ConfigError(f"input_state must be 'paper' or a {self.n_qutrits}-bit string")
        if self.mode == "fig2-sweep" and not (self.delta1_grid and self.delta_small_grid):
            raise ConfigError("fig2-sweep needs non-empty delta1_grid and delta_small_grid")
        if self.mode == "fig3-curve" and not self.gamma_grid:
            raise ConfigError("fig3-curve needs a non-empty gamma_grid")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        clean = {}
        for key, val in data.items():
            clean[key] = _coerce(key, val, known[key].type)
        return cls(**clean)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def params(self) -> SystemParams:
        """Validated physical parameters (matched μ when ``mu`` is unset)."""
        mu = self.mu if self.mu is not None else matched_mu(self.delta1, self.delta_cap, self.mu1)
        return SystemParams(
            n_qutrits=self.n_qutrits, mu1=self.mu1, mu=mu, delta1=self.delta1,
            delta_cap=self.delta_cap, kappa=self.kappa, gamma_fe=self.gamma_fe,
            gamma_fg=self.gamma_fg, gamma_eg=self.gamma_eg, gamma_phi_f=self.gamma_phi_f,
            gamma_phi_e=self.gamma_phi_e, fock_cutoff=self.fock_cutoff,
        )


def _coerce(key: str, val: Any, typ: str) -> Any:
    try:
        if typ.startswith("list"):
            if not isinstance(val, list):
                raise TypeError("expected a list")
            return [float(v) for v in val]
        if val is None:
            if "None" not in typ:
                raise TypeError("null not allowed")
            return None
        if typ.startswith("int"):
            if isinstance(val, bool) or float(val) != int(val):
                raise TypeError("expected an integer")
            return int(val)
        if typ.startswith("float"):
            if isinstance(val, bool):
                raise TypeError("expected a number")
            return float(val)
        if typ.startswith("str"):
            if not isinstance(val, str):
                raise TypeError("expected a string")
            return val
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {val!r} ({exc})") from None
    return val


def load_config(path: str, **overrides) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(data)


# -- result containers and CSV -------------------------------------------------

def fmt(x: Any) -> str:
    """Locale-independent 9-significant-digit formatting."""
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.9g}"


@dataclass
class SweepResult:
    columns: list[str]
    rows: list[dict]
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(fmt(row.get(c)) for c in self.columns) + "\n")
        return buf.getvalue()

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    def to_json(self) -> str:
        return json.dumps({"columns": self.columns, "rows": self.rows, "metadata": self.metadata},
                          indent=2, default=float)


def _map(fn: Callable, tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _metadata(cfg: RunConfig, start: float) -> dict:
    return {"config": cfg.to_dict(), "version": __version__, "wall_time_s": time.time() - start}


FIG2_COLUMNS = ["delta1", "delta_small", "delta_cap", "mu", "gate_time", "fidelity",
                "max_photon", "drift", "status"]


def _fig2_point(task: tuple) -> dict:
    from .dynamics import EvolutionConfig, run_gate_ideal

    index, base, d1, ds, input_state, rtol = task
    row = {"index": index, "delta1": d1, "delta_small": ds, "delta_cap": d1 - ds}
    nan = math.nan
    if ds <= 0 or d1 - ds <= 0:
        row.update(mu=nan, gate_time=nan, fidelity=nan, max_photon=nan, drift=nan, status="invalid")
        return row
    try:
        mu = matched_mu(d1, d1 - ds, base["mu1"])
        params = SystemParams(**{**base, "delta1": d1, "delta_cap": d1 - ds, "mu": mu})
        over = {} if rtol is None else {"rtol": rtol}
        run = run_gate_ideal(params, input_state, cfg=EvolutionConfig.for_params(params, **over))
    except GateSimError as exc:
        row.update(mu=nan, gate_time=nan, fidelity=nan, max_photon=nan, drift=nan,
                   status=f"error: {type(exc).__name__}")
        return row
    row.update(mu=mu, gate_time=run.gate_time, fidelity=run.fidelity,
               max_photon=run.max_photon, drift=run.drift, status="ok")
    return row


def _lossless_base(cfg: RunConfig) -> dict:
    return dict(n_qutrits=cfg.n_qutrits, mu1=cfg.mu1, fock_cutoff=cfg.fock_cutoff)


def run_fig2_sweep(cfg: RunConfig, jobs: int | None = None) -> SweepResult:
    """Fidelity over the (Δ₁, δ) grid with Δ = Δ₁ − δ and matched μ, no dissipation."""
    start = time.time()
    if not (cfg.delta1_grid and cfg.delta_small_grid):
        raise ConfigError("fig2 sweep needs non-empty delta1_grid and delta_small_grid")
    base = _lossless_base(cfg)
    tasks = [(i, base, d1, ds, cfg.input_state, cfg.rtol)
             for i, (d1, ds) in enumerate(product(cfg.delta1_grid, cfg.delta_small_grid))]
    rows = sorted(_map(_fig2_point, tasks, jobs or cfg.jobs), key=lambda r: r["index"])
    for r in rows:
        r.pop("index")
    return SweepResult(FIG2_COLUMNS, rows, _metadata(cfg, start))


def fig2_surface_csv(result: SweepResult) -> str:
    """Fidelity matrix: one row per Δ₁, one column per δ."""
    d1s = sorted({r["delta1"] for r in result.rows})
    dss = sorted({r["delta_small"] for r in result.rows})
    lookup = {(r["delta1"], r["delta_small"]): r["fidelity"] for r in result.rows}
    lines = ["delta1\\delta_small," + ",".join(fmt(x) for x in dss)]
    for d1 in d1s:
        lines.append(fmt(d1) + "," + ",".join(fmt(lookup.get((d1, ds), math.nan)) for ds in dss))
    return "\n".join(lines) + "\n"


FIG3_COLUMNS = ["gamma", "kappa", "gamma_fg", "mu", "gate_time", "fidelity", "max_photon",
                "drift", "status"]


def _fig3_point(task: tuple) -> dict:
    from .dynamics import EvolutionConfig, run_gate_lossy

    index, params_dict, gamma, kappa, ratio, input_state, rtol = task
    params = SystemParams(**params_dict).with_uniform_gamma(gamma, kappa=kappa, fg_ratio=ratio)
    row = {"index": index, "gamma": gamma, "kappa": kappa, "gamma_fg": params.gamma_fg,
           "mu": params.mu}
    try:
        over = {} if rtol is None else {"rtol": rtol}
        run = run_gate_lossy(params, input_state,
                             cfg=EvolutionConfig.for_params(params, density=True, **over))
    except GateSimError as exc:
        row.update(gate_time=math.nan, fidelity=math.nan, max_photon=math.nan, drift=math.nan,
                   status=f"error: {type(exc).__name__}")
        return row
    row.update(gate_time=run.gate_time, fidelity=run.fidelity, max_photon=run.max_photon,
               drift=run.drift, status="ok")
    return row


def run_fig3_curve(cfg: RunConfig, jobs: int | None = None) -> SweepResult:
    """Lossy fidelity versus γ with all γ equal, γ_fg = ratio·γ and fixed κ."""
    start = time.time()
    if not cfg.gamma_grid:
        raise ConfigError("fig3 curve needs a non-empty gamma_grid")
    if any(g < 0 for g in cfg.gamma_grid):
        raise ConfigError("gamma grid values must be non-negative")
    base = dataclasses.asdict(cfg.params())
    tasks = [(i, base, g, cfg.fig3_kappa, cfg.fig3_fg_ratio, cfg.input_state, cfg.rtol)
             for i, g in enumerate(cfg.gamma_grid)]
    rows = sorted(_map(_fig3_point, tasks, jobs or cfg.jobs), key=lambda r: r["index"])
    for r in rows:
        r.pop("index")
    return SweepResult(FIG3_COLUMNS, rows, _metadata(cfg, start))


def run_single(cfg: RunConfig) -> dict:
    from .dynamics import EvolutionConfig, run_gate_ideal, run_gate_lossy

    params = cfg.params()
    der = derive(params)
    over = {} if cfg.rtol is None else {"rtol": cfg.rtol}
    if params.is_lossless:
        run = run_gate_ideal(params, cfg.input_state, cfg=EvolutionConfig.for_params(params, **over))
    else:
        run = run_gate_lossy(params, cfg.input_state,
                             cfg=EvolutionConfig.for_params(params, density=True, **over))
    return {
        "params": params.as_dict(),
        "derived": dataclasses.asdict(der),
        "lossy": not params.is_lossless,
        "fidelity": run.fidelity,
        "max_photon": run.max_photon,
        "drift": run.drift,
    }


def run_convergence(cfg: RunConfig) -> dict:
    from .dynamics import convergence_study

    rep = convergence_study(cfg.params(), cfg.input_state)
    return dataclasses.asdict(rep)


# -- physical units -------------------------------------------------------------

@dataclass
class UnitsReport:
    mu1_rad_s: float
    omega_c_rad_s: float
    gate_time_units: float
    gate_time_s: float
    mu_rad_s: float
    kappa_rad_s: float
    kappa_hz: float
    quality_factor: float
    decoherence_time_s: float | None = None

    def checks(self) -> list[dict]:
        q_dev = abs(self.quality_factor - PAPER_Q) / PAPER_Q
        return [
            _check("quality_factor_vs_reported", self.quality_factor, "within 1% of 5.97e3",
                   q_dev <= 0.01),
            _check("gate_time_s", self.gate_time_s, "approx 1.26e-7 s (2% band)",
                   abs(self.gate_time_s - 1.26e-7) / 1.26e-7 <= 0.02),
        ]


def physical_units_report(mu1_rad_s: float = PAPER_MU1_RAD_S,
                          omega_c_rad_s: float = PAPER_OMEGA_C_RAD_S,
                          kappa: float = PAPER_KAPPA,
                          params: SystemParams | None = None,
                          gamma: float | None = None) -> UnitsReport:
    """Convert dimensionless results to SI.

    ``mu1_rad_s`` and ``omega_c_rad_s`` are angular frequencies; ``kappa``
    and ``gamma`` are in units of μ₁.  The gate time comes from ``params``
    (default: matched three-qutrit point).
    """
    for name, val in (("mu1", mu1_rad_s), ("omega_c", omega_c_rad_s), ("kappa", kappa)):
        if not val > 0:
            raise ParameterError(f"{name} must be positive")
    params = params or SystemParams.paper_point()
    t_units = derive(params).gate_time
    kappa_rad = kappa * mu1_rad_s
    return UnitsReport(
        mu1_rad_s=mu1_rad_s,
        omega_c_rad_s=omega_c_rad_s,
        gate_time_units=t_units,
        gate_time_s=t_units / mu1_rad_s,
        mu_rad_s=params.mu / params.mu1 * mu1_rad_s,
        kappa_rad_s=kappa_rad,
        kappa_hz=kappa_rad / (2 * math.pi),
        quality_factor=omega_c_rad_s / kappa_rad,
        decoherence_time_s=None if gamma is None else 1.0 / (gamma * mu1_rad_s),
    )


# -- validation suite ----------------------------------------------------------

def _check(name: str, measured: Any, threshold: Any, passed: bool, module: str = "", note: str = "") -> dict:
    out = {"check": name, "status": "pass" if passed else "fail",
           "measured": measured, "threshold": threshold}
    if module:
        out["module"] = module
    if note:
        out["note"] = note
    return out


@dataclass
class ValidationReport:
    checks: list[dict]
    checklist: dict[str, list[str]]

    @property
    def passed(self) -> bool:
        return all(c["status"] == "pass" for c in self.checks)

    def to_json(self) -> str:
        return json.dumps({"passed": self.passed, "checks": self.checks,
                           "checklist": self.checklist}, indent=2, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o))


def run_validation_suite(cfg: RunConfig | None = None, include_slow: bool = True) -> ValidationReport:
    """Execute every module invariant; failures are report content, never exceptions."""
    from .validation import CHECKLIST, run_checks

    cfg = cfg or RunConfig(mode="validate")
    try:
        params = cfg.params()
    except ParameterError as exc:
        return ValidationReport(
            [_check("config", str(exc), "valid SystemParams", False, "experiments-cli")],
            CHECKLIST,
        )
    checks = run_checks(params, include_slow=include_slow)
    return ValidationReport(checks, CHECKLIST)
