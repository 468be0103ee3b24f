"""Schrödinger and Lindblad time evolution plus gate-fidelity pipelines.

Both engines hand a flat complex vector to the same embedded Runge-Kutta
integrator (``scipy.integrate.solve_ivp``).  Density matrices are
vectorised row-major, so ``vec(A ρ B) = (A ⊗ Bᵀ) vec(ρ)``.  Nothing is
renormalised during or after integration; norm and trace drift are reported
and enforced as accuracy diagnostics.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .errors import DimensionLimitError, NumericalError, ParameterError
from .gate import closed_form_unitary, encode, ideal_output_state, paper_input_state
from .model import FullHamiltonian, SystemParams, derive
from .operators import (
    E,
    F,
    G,
    MAX_DENSITY_DIM,
    DensityMatrix,
    HilbertSpace,
    QuantumState,
    annihilation,
    dagger,
    embed,
    pure_state_fidelity,
    transition,
)

_STAGES = {"RK45": 6, "DOP853": 12, "RK23": 3}


@dataclass(frozen=True)
class EvolutionConfig:
    """Integrator settings.

    ``max_step`` of ``None`` means unbounded; :meth:`for_params` sets it to
    ``2π/(20·Δ_max)`` so the fastest interaction-picture phase is resolved.
    """

    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float | None = None
    first_step: float | None = None
    max_steps: int = 1_000_000
    method: str = "DOP853"
    n_samples: int = 200
    drift_tol: float = 1e-6

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ParameterError("tolerances must be positive")
        if self.max_step is not None and self.max_step <= 0:
            raise ParameterError("max_step must be positive")
        if self.method not in _STAGES:
            raise ParameterError(f"unsupported integrator {self.method!r}")
        if self.n_samples < 2:
            raise ParameterError("n_samples must be >= 2")

    @classmethod
    def for_params(cls, params: SystemParams, density: bool = False, **overrides) -> "EvolutionConfig":
        fastest = max(params.delta1, params.delta_cap)
        kw = dict(rtol=1e-7 if density else 1e-8, max_step=2 * math.pi / (20 * fastest))
        kw.update(overrides)
        return cls(**kw)

    def replace(self, **changes) -> "EvolutionConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class Trajectory:
    times: np.ndarray
    norm: np.ndarray  # ‖ψ‖ for states, Re tr ρ for density matrices
    photon_number: np.ndarray
    populations: np.ndarray  # (samples, n_qutrits, 3)
    final: Union[QuantumState, DensityMatrix] = field(repr=False)
    nfev: int = 0

    @property
    def drift(self) -> float:
        return float(np.max(np.abs(self.norm - 1.0)))

    @property
    def max_photon(self) -> float:
        return float(np.max(self.photon_number))


class _StepGuard(Exception):
    pass


def _integrate(rhs, y0: np.ndarray, t_final: float, cfg: EvolutionConfig):
    if t_final < 0:
        raise ParameterError("t_final must be non-negative")
    times = np.linspace(0.0, t_final, cfg.n_samples) if t_final > 0 else np.array([0.0])
    if t_final == 0:
        return times, y0[:, None].copy(), 0

    budget = cfg.max_steps * _STAGES[cfg.method]
    calls = 0

    def guarded(t, y):
        nonlocal calls
        calls += 1
        if calls > budget:
            raise _StepGuard
        return rhs(t, y)

    kw = {}
    if cfg.max_step is not None:
        kw["max_step"] = cfg.max_step
    if cfg.first_step is not None:
        kw["first_step"] = cfg.first_step
    try:
        sol = solve_ivp(guarded, (0.0, t_final), y0, method=cfg.method, t_eval=times,
                        rtol=cfg.rtol, atol=cfg.atol, **kw)
    except _StepGuard:
        raise NumericalError(f"step-count guard exceeded ({cfg.max_steps} steps)") from None
    if sol.status != 0:
        raise NumericalError(f"integrator accuracy failure: {sol.message}")
    return sol.t, sol.y, sol.nfev


def _photon_diag(space: HilbertSpace) -> np.ndarray:
    return np.tile(np.arange(space.cavity_dim, dtype=float), space.qutrit_dim)


def _level_populations(diag: np.ndarray, space: HilbertSpace) -> np.ndarray:
    """Per-qutrit (g, e, f) populations from basis-state probabilities, shape (..., n, 3)."""
    n = space.n_qutrits
    p = diag.reshape(diag.shape[:-1] + space.dims)
    lead = len(diag.shape) - 1
    out = []
    for q in range(n):
        axes = tuple(lead + i for i in range(n + 1) if i != q)
        out.append(p.sum(axis=axes))
    return np.stack(out, axis=-2)


def evolve_schrodinger(h_of_t, psi0: QuantumState, t_final: float,
                       cfg: EvolutionConfig | None = None) -> Trajectory:
    """Integrate ``dψ/dt = -i H(t) ψ``.

    ``h_of_t`` is either a callable returning the matrix at ``t`` or an
    object with an ``apply(t, psi)`` method (e.g. :class:`FullHamiltonian`).
    """
    cfg = cfg or EvolutionConfig()
    space = psi0.space
    if hasattr(h_of_t, "apply"):
        rhs = lambda t, y: -1j * h_of_t.apply(t, y)
    else:
        rhs = lambda t, y: -1j * (h_of_t(t) @ y)

    times, ys, nfev = _integrate(rhs, np.array(psi0.amplitudes, dtype=complex), t_final, cfg)
    probs = np.abs(ys.T) ** 2
    norm = np.sqrt(probs.sum(axis=1))
    traj = Trajectory(
        times=times,
        norm=norm,
        photon_number=probs @ _photon_diag(space),
        populations=_level_populations(probs, space),
        final=QuantumState(space, ys[:, -1]),
        nfev=nfev,
    )
    if traj.drift > cfg.drift_tol:
        raise NumericalError(f"integrator accuracy failure: norm drift {traj.drift:.3e}")
    return traj


def propagator(h_of_t: Callable[[float], np.ndarray], dim: int, t_final: float,
               cfg: EvolutionConfig | None = None) -> np.ndarray:
    """Integrate ``dU/dt = -i H(t) U`` from ``U(0) = I`` (column-stacked)."""
    cfg = cfg or EvolutionConfig(rtol=1e-11, atol=1e-13)

    def rhs(t, y):
        return (-1j * (h_of_t(t) @ y.reshape(dim, dim))).reshape(-1)

    _, ys, _ = _integrate(rhs, np.eye(dim, dtype=complex).reshape(-1), t_final,
                          cfg.replace(n_samples=2))
    return ys[:, -1].reshape(dim, dim)


# -- Lindblad --------------------------------------------------------------

def jump_operators(params: SystemParams, space: HilbertSpace) -> list[tuple[float, np.ndarray]]:
    """``(rate, Λ)`` pairs of the master equation; zero-rate channels are omitted."""
    ops = [(params.kappa, embed(annihilation(space.fock_cutoff), "cavity", space))]
    local = [
        (params.gamma_fe, transition(E, F)),
        (params.gamma_fg, transition(G, F)),
        (params.gamma_eg, transition(G, E)),
        (params.gamma_phi_f, transition(F, F)),
        (params.gamma_phi_e, transition(E, E)),
    ]
    for j in range(1, space.n_qutrits + 1):
        ops += [(rate, embed(op, j, space)) for rate, op in local]
    return [(rate, op) for rate, op in ops if rate > 0]


def _left(a, d):
    return sp.kron(sp.csr_matrix(a), sp.identity(d, format="csr"), format="csr")


def _right(b, d):
    return sp.kron(sp.identity(d, format="csr"), sp.csr_matrix(b).T, format="csr")


class LindbladGenerator:
    """Sparse row-major superoperator ``L(t)`` acting on ``vec(ρ)``."""

    def __init__(self, params: SystemParams, space: HilbertSpace | None = None):
        space = space or params.space()
        if space.dim > MAX_DENSITY_DIM:
            raise DimensionLimitError(
                f"dimension limit exceeded: {space.dim} > {MAX_DENSITY_DIM} for density-matrix evolution"
            )
        self.space = space
        d = space.dim
        self.hamiltonian = FullHamiltonian(params, space)
        dissipator = sp.csr_matrix((d * d, d * d), dtype=complex)
        for rate, op in jump_operators(params, space):
            lol = dagger(op) @ op
            dissipator = dissipator + rate * (
                sp.kron(sp.csr_matrix(op), sp.csr_matrix(op.conj()), format="csr")
                - 0.5 * _left(lol, d) - 0.5 * _right(lol, d)
            )
        self.static = dissipator.tocsr()
        # -i[H, ρ] with H = Σ (c P + c* P†): one superoperator per P and per P†.
        self.pieces = []
        for _, _, op in self.hamiltonian.pieces:
            self.pieces.append(-1j * (_left(op, d) - _right(op, d)))
            self.pieces.append(-1j * (_left(dagger(op), d) - _right(dagger(op), d)))

    def __call__(self, t: float, v: np.ndarray) -> np.ndarray:
        out = self.static @ v
        for k, c in enumerate(self.hamiltonian.coefficients(t)):
            out += c * (self.pieces[2 * k] @ v) + np.conj(c) * (self.pieces[2 * k + 1] @ v)
        return out


def evolve_lindblad(params: SystemParams, rho0: DensityMatrix, t_final: float,
                    cfg: EvolutionConfig | None = None) -> Trajectory:
    space = rho0.space
    if space.n_qutrits != params.n_qutrits:
        raise ParameterError("density matrix space does not match params")
    cfg = cfg or EvolutionConfig.for_params(params, density=True)
    gen = LindbladGenerator(params, space)
    d = space.dim
    times, ys, nfev = _integrate(gen, np.array(rho0.matrix, dtype=complex).reshape(-1), t_final, cfg)
    diag_idx = np.arange(d) * (d + 1)
    diags = ys[diag_idx, :].T  # (samples, d)
    trace = diags.real.sum(axis=1)
    pops = diags.real
    rho_final = ys[:, -1].reshape(d, d)
    traj = Trajectory(
        times=times,
        norm=trace,
        photon_number=pops @ _photon_diag(space),
        populations=_level_populations(pops, space),
        final=DensityMatrix(space, rho_final),
        nfev=nfev,
    )
    trace_drift = max(traj.drift, float(np.max(np.abs(diags.imag.sum(axis=1)))))
    if trace_drift > cfg.drift_tol:
        raise NumericalError(f"integrator accuracy failure: trace drift {trace_drift:.3e}")
    return traj


# -- gate pipelines ---------------------------------------------------------

InputSpec = Union[None, str, QuantumState, Callable[[HilbertSpace], QuantumState]]


def resolve_input(params: SystemParams, input: InputSpec = None) -> QuantumState:
    """Paper superposition (``None``/``"paper"``), a logical bitstring, or a ready state."""
    space = params.space()
    if input is None or input == "paper":
        return paper_input_state(space)
    if isinstance(input, str):
        return encode(input, space)
    if isinstance(input, QuantumState):
        if input.space.n_qutrits != params.n_qutrits:
            raise ParameterError("input state space does not match params")
        return input
    return input(space)


@dataclass
class GateRun:
    fidelity: float
    gate_time: float
    max_photon: float
    drift: float
    trajectory: Trajectory = field(repr=False)


def _duration(params: SystemParams, duration: float | None) -> float:
    if duration is not None:
        return duration
    t = derive(params).gate_time
    if not math.isfinite(t):
        raise ParameterError("gate time undefined for zero coupling; pass an explicit duration")
    return t


def run_gate_ideal(params: SystemParams, input: InputSpec = None,
                   cfg: EvolutionConfig | None = None, duration: float | None = None) -> GateRun:
    """Closed evolution under the full qutrit-cavity coupling for one gate time."""
    psi0 = resolve_input(params, input)
    target = ideal_output_state(psi0)
    t = _duration(params, duration)
    cfg = cfg or EvolutionConfig.for_params(params)
    traj = evolve_schrodinger(FullHamiltonian(params, psi0.space), psi0, t, cfg)
    fid = abs(target.overlap(traj.final)) ** 2
    return GateRun(fid, t, traj.max_photon, traj.drift, traj)


def run_gate_lossy(params: SystemParams, input: InputSpec = None,
                   cfg: EvolutionConfig | None = None, duration: float | None = None) -> GateRun:
    """Master-equation evolution; fidelity is ``⟨ψ_id|ρ̃|ψ_id⟩``."""
    psi0 = resolve_input(params, input)
    target = ideal_output_state(psi0)
    t = _duration(params, duration)
    cfg = cfg or EvolutionConfig.for_params(params, density=True)
    traj = evolve_lindblad(params, psi0.density_matrix(), t, cfg)
    fid = pure_state_fidelity(target, traj.final)
    return GateRun(fid, t, traj.max_photon, traj.drift, traj)


def gate_fidelity_ideal(params: SystemParams, input: InputSpec = None, **kw) -> float:
    return run_gate_ideal(params, input, **kw).fidelity


def gate_fidelity_lossy(params: SystemParams, input: InputSpec = None, **kw) -> float:
    return run_gate_lossy(params, input, **kw).fidelity


def closed_form_fidelity(params: SystemParams, input: InputSpec = None,
                         duration: float | None = None) -> float:
    """Fidelity predicted by the diagonal effective propagator (cavity stays in vacuum)."""
    psi0 = resolve_input(params, input)
    space = psi0.space
    u = np.diag(closed_form_unitary(params, space.n_qutrits, _duration(params, duration)))
    out = psi0.amplitudes * np.repeat(u, space.cavity_dim)
    return abs(np.vdot(ideal_output_state(psi0).amplitudes, out)) ** 2


def basis_state_fidelities(params: SystemParams, cfg: EvolutionConfig | None = None) -> dict[str, dict]:
    """Evolve every encoded basis state for one gate time.

    Returns, per bitstring, the overlap ``|⟨target|ψ(t_g)⟩|²`` with the
    sign-correct target and the phase of the amplitude in units of π.
    """
    from .gate import bitstrings, gate_sign

    space = params.space()
    cfg = cfg or EvolutionConfig.for_params(params)
    h = FullHamiltonian(params, space)
    t = _duration(params, None)
    out = {}
    for bits in bitstrings(params.n_qutrits):
        psi0 = encode(bits, space)
        traj = evolve_schrodinger(h, psi0, t, cfg)
        amp = psi0.overlap(traj.final)
        out[bits] = {
            "sign": gate_sign(bits),
            "overlap": abs(gate_sign(bits) * amp) ** 2,
            "phase_over_pi": float(np.angle(amp) / np.pi),
        }
    return out


@dataclass
class ConvergenceReport:
    rows: list[dict]
    converged: bool
    cutoff: int | None
    rtol: float | None
    message: str = ""


def convergence_study(params: SystemParams, input: InputSpec = None,
                      cutoffs: Sequence[int] = (1, 2, 4, 8, 16, 32),
                      rtols: Sequence[float] = (1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-10),
                      threshold: float = 1e-4, duration: float | None = None) -> ConvergenceReport:
    """Double the Fock cutoff while tightening rtol until successive fidelities agree.

    The reported pair is the coarser of the first two consecutive levels
    whose fidelities differ by less than ``threshold``.
    """
    if len(rtols) < len(cutoffs):
        raise ParameterError("need one rtol per cutoff level")
    rows: list[dict] = []
    prev = None
    for cutoff, rtol in zip(cutoffs, rtols):
        p = params.replace(fock_cutoff=cutoff)
        cfg = EvolutionConfig.for_params(p, rtol=rtol)
        fid = run_gate_ideal(p, input, cfg=cfg, duration=duration).fidelity
        diff = None if prev is None else abs(fid - prev["fidelity"])
        row = {"fock_cutoff": cutoff, "rtol": rtol, "fidelity": fid, "difference": diff}
        rows.append(row)
        if diff is not None and diff < threshold:
            return ConvergenceReport(rows, True, prev["fock_cutoff"], prev["rtol"])
        prev = row
    return ConvergenceReport(rows, False, None, None,
                             f"not converged by cutoff {cutoffs[-1]}")
