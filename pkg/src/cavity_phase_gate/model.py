"""Physical parameters and Hamiltonian builders.

Units: ħ = 1, rates are angular frequencies in units of the control
coupling ``mu1`` (so ``mu1 = 1`` by convention) and times are in ``1/mu1``.
Everything lives in the interaction picture with respect to the bare
qutrit and cavity energies.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ParameterError
from .operators import (
    E,
    F,
    G,
    QUTRIT_DIM,
    HilbertSpace,
    annihilation,
    dagger,
    embed,
    kron_all,
    projector,
    transition,
)

PAPER_DELTA1 = 10.7
PAPER_DELTA_CAP = 8.4
PAPER_MU_ROUNDED = 3.08
PAPER_KAPPA = 0.01
PAPER_FG_RATIO = 0.01
DEFAULT_FOCK_CUTOFF = 5

RATE_FIELDS = ("kappa", "gamma_fe", "gamma_fg", "gamma_eg", "gamma_phi_f", "gamma_phi_e")


@dataclass(frozen=True)
class SystemParams:
    """Couplings, detunings, decay rates and Fock cutoff.

    Rates are uniform across qutrits: ``gamma_fe`` drives |f⟩→|e⟩,
    ``gamma_fg`` |f⟩→|g⟩, ``gamma_eg`` |e⟩→|g⟩, and the two ``gamma_phi_*``
    are pure dephasing of |f⟩ and |e⟩.
    """

    n_qutrits: int = 3
    mu1: float = 1.0
    mu: float = PAPER_MU_ROUNDED
    delta1: float = PAPER_DELTA1
    delta_cap: float = PAPER_DELTA_CAP
    kappa: float = 0.0
    gamma_fe: float = 0.0
    gamma_fg: float = 0.0
    gamma_eg: float = 0.0
    gamma_phi_f: float = 0.0
    gamma_phi_e: float = 0.0
    fock_cutoff: int = DEFAULT_FOCK_CUTOFF

    def __post_init__(self):
        if int(self.n_qutrits) != self.n_qutrits or self.n_qutrits < 2:
            raise ParameterError(f"n_qutrits must be an integer >= 2, got {self.n_qutrits!r}")
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 1:
            raise ParameterError("cutoff too small to represent coupling")
        for name in ("mu1", "mu", "delta1", "delta_cap", *RATE_FIELDS):
            val = getattr(self, name)
            if not math.isfinite(val):
                raise ParameterError(f"{name} must be finite, got {val!r}")
        # Zero couplings are admitted so the trivial no-evolution limit is expressible.
        if self.mu1 < 0 or self.mu < 0:
            raise ParameterError("couplings must be non-negative")
        if self.delta1 <= 0 or self.delta_cap <= 0:
            raise ParameterError("detunings delta1 and delta_cap must be positive")
        if self.delta1 == self.delta_cap:
            raise ParameterError("degenerate detunings: delta1 == delta_cap (delta = 0)")
        for name in RATE_FIELDS:
            if getattr(self, name) < 0:
                raise ParameterError(f"rate {name} must be non-negative")

    @classmethod
    def paper_point(cls, matched: bool = True, **overrides) -> "SystemParams":
        """Three qutrits at Δ₁ = 10.7, Δ = 8.4 with μ matched (or the rounded 3.08)."""
        d1 = overrides.pop("delta1", PAPER_DELTA1)
        dc = overrides.pop("delta_cap", PAPER_DELTA_CAP)
        mu1 = overrides.pop("mu1", 1.0)
        mu = matched_mu(d1, dc, mu1) if matched else PAPER_MU_ROUNDED
        mu = overrides.pop("mu", mu)
        return cls(mu1=mu1, mu=mu, delta1=d1, delta_cap=dc, **overrides)

    def with_uniform_gamma(self, gamma: float, kappa: float = PAPER_KAPPA,
                           fg_ratio: float = PAPER_FG_RATIO) -> "SystemParams":
        """Decoherence convention used for the γ scan: all γ equal, γ_fg = fg_ratio·γ."""
        if gamma < 0:
            raise ParameterError("gamma must be non-negative")
        return self.replace(
            kappa=kappa,
            gamma_fe=gamma,
            gamma_eg=gamma,
            gamma_phi_f=gamma,
            gamma_phi_e=gamma,
            gamma_fg=fg_ratio * gamma,
        )

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    @property
    def is_lossless(self) -> bool:
        return all(getattr(self, name) == 0 for name in RATE_FIELDS)

    def space(self) -> HilbertSpace:
        return HilbertSpace(self.n_qutrits, self.fock_cutoff)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class DerivedParams:
    delta_small: float
    lam: float
    gate_time: float
    stark_f1: float
    cross_shift: float
    matching_residual: float


def derive(params: SystemParams) -> DerivedParams:
    d1, dc, mu, mu1 = params.delta1, params.delta_cap, params.mu, params.mu1
    delta = d1 - dc
    if delta == 0:
        raise ParameterError("degenerate detunings: delta = delta1 - delta_cap = 0")
    lam = 0.5 * mu * mu1 * (1.0 / dc + 1.0 / d1)
    stark = mu1**2 / d1
    cross = lam**2 / delta
    # gate_time from δπ/λ² (the condition that yields the π phases), not 2πΔ₁/μ₁².
    gate_time = delta * math.pi / lam**2 if lam != 0 else math.inf
    residual = abs(stark - 2 * cross) / stark if stark != 0 else math.nan
    return DerivedParams(delta, lam, gate_time, stark, cross, residual)


def matched_mu(delta1: float, delta_cap: float, mu1: float = 1.0) -> float:
    """Target coupling that makes μ₁²/Δ₁ = 2λ²/δ hold exactly."""
    delta = delta1 - delta_cap
    if delta <= 0 or delta_cap <= 0 or delta1 <= 0:
        raise ParameterError("matching condition has no real solution (need delta1 > delta_cap > 0)")
    if mu1 <= 0:
        raise ParameterError("mu1 must be positive")
    return 2.0 * mu1 * math.sqrt(delta / (2.0 * delta1)) / (mu1 * (1.0 / delta_cap + 1.0 / delta1))


# -- operators on the qutrit register -------------------------------------

def _raise_fe() -> np.ndarray:
    """σ⁺ = |f⟩⟨e|."""
    return transition(F, E)


def _qutrit_op(op: np.ndarray, site: int, n: int) -> np.ndarray:
    factors = [np.eye(QUTRIT_DIM, dtype=complex) for _ in range(n)]
    factors[site - 1] = op
    return kron_all(factors)


def _check_space(params: SystemParams, space: HilbertSpace) -> None:
    if space.n_qutrits != params.n_qutrits:
        raise ParameterError(
            f"space has {space.n_qutrits} qutrits, params specify {params.n_qutrits}"
        )
    space.check_dim()


class FullHamiltonian:
    """Time-dependent qutrit-cavity coupling with precomputed operator pieces.

    ``H(t) = Σ_k μ(e^{iΔt} a σ_k⁺ + h.c.) + μ₁(e^{iΔ₁t} a σ_1⁺ + h.c.)``
    where σ⁺ = |f⟩⟨e|.  Calling the object returns the dense matrix at ``t``.
    """

    def __init__(self, params: SystemParams, space: HilbertSpace | None = None):
        space = space or params.space()
        _check_space(params, space)
        self.params = params
        self.space = space
        a = embed(annihilation(space.fock_cutoff), "cavity", space)
        sp = _raise_fe()
        control = a @ embed(sp, 1, space)
        targets = sum((a @ embed(sp, k, space) for k in range(2, space.n_qutrits + 1)),
                      np.zeros_like(a))
        # (coupling, angular frequency, operator multiplying e^{iωt})
        self.pieces = [
            (params.mu1, params.delta1, control),
            (params.mu, params.delta_cap, targets),
        ]

    def coefficients(self, t: float) -> list[complex]:
        return [c * np.exp(1j * w * t) for c, w, _ in self.pieces]

    def __call__(self, t: float) -> np.ndarray:
        h = np.zeros((self.space.dim, self.space.dim), dtype=complex)
        for coef, (_, _, op) in zip(self.coefficients(t), self.pieces):
            h += coef * op
        return h + dagger(h)

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        """``H(t) @ psi`` without forming the full matrix."""
        out = np.zeros_like(psi)
        for coef, (_, _, op) in zip(self.coefficients(t), self.pieces):
            out += coef * (op @ psi) + np.conj(coef) * (dagger(op) @ psi)
        return out


def build_full_hamiltonian(params: SystemParams, space: HilbertSpace, t: float) -> np.ndarray:
    return FullHamiltonian(params, space)(t)


class DispersiveHamiltonian:
    """Cavity-dispersive Hamiltonian with explicit photon-number operators.

    Static part: Stark terms ``-(μ²/Δ)(a⁺a|e_k⟩⟨e_k| - aa⁺|f_k⟩⟨f_k|)`` (and the
    μ₁, Δ₁ analogue for qutrit 1) plus the cavity-mediated flip-flop among the
    targets.  Time-dependent part: ``λ Σ_k (e^{iδt} σ_1⁺σ_k⁻ + h.c.)``.
    """

    def __init__(self, params: SystemParams, space: HilbertSpace | None = None):
        space = space or params.space()
        _check_space(params, space)
        self.params = params
        self.space = space
        der = derive(params)
        n = space.n_qutrits
        a = embed(annihilation(space.fock_cutoff), "cavity", space)
        ad = dagger(a)
        num, anti = ad @ a, a @ ad
        sp = _raise_fe()
        sm = dagger(sp)

        static = np.zeros((space.dim, space.dim), dtype=complex)
        for k in range(1, n + 1):
            shift = params.mu1**2 / params.delta1 if k == 1 else params.mu**2 / params.delta_cap
            static -= shift * (num @ embed(projector(E), k, space)
                               - anti @ embed(projector(F), k, space))
        # One coefficient μ²/Δ per unordered target pair.
        for k, kp in combinations(range(2, n + 1), 2):
            hop = embed(sp, k, space) @ embed(sm, kp, space)
            static += params.mu**2 / params.delta_cap * (hop + dagger(hop))
        exchange = sum((embed(sp, 1, space) @ embed(sm, k, space) for k in range(2, n + 1)),
                       np.zeros_like(a))
        self.static = static
        self.exchange = exchange
        self.lam = der.lam
        self.delta = der.delta_small
        self.number = num

    def __call__(self, t: float) -> np.ndarray:
        x = self.lam * np.exp(1j * self.delta * t) * self.exchange
        return self.static + x + dagger(x)


def build_dispersive_hamiltonian(params: SystemParams, space: HilbertSpace, t: float) -> np.ndarray:
    return DispersiveHamiltonian(params, space)(t)


def build_effective_hamiltonian_full(params: SystemParams, n: int | None = None) -> np.ndarray:
    """Qutrit-only Hamiltonian after eliminating the cavity in vacuum (3ⁿ × 3ⁿ)."""
    n = params.n_qutrits if n is None else n
    if n < 2:
        raise ParameterError("need n >= 2 qutrits")
    der = derive(params)
    sp = _raise_fe()
    sm = dagger(sp)
    s_plus = {k: _qutrit_op(sp, k, n) for k in range(1, n + 1)}
    s_minus = {k: _qutrit_op(sm, k, n) for k in range(1, n + 1)}
    pf1 = _qutrit_op(projector(F), 1, n)
    pe1 = _qutrit_op(projector(E), 1, n)
    stark_t = params.mu**2 / params.delta_cap

    h = der.stark_f1 * pf1
    for k in range(2, n + 1):
        h += stark_t * _qutrit_op(projector(F), k, n)
    for k, kp in combinations(range(2, n + 1), 2):
        hop = s_plus[k] @ s_minus[kp]
        h += stark_t * (hop + dagger(hop))
    for j in range(2, n + 1):
        for k in range(2, n + 1):
            h += der.cross_shift * (pf1 @ s_minus[j] @ s_plus[k]
                                    - pe1 @ s_plus[j] @ s_minus[k])
    return h


def encoded_energies(params: SystemParams, n: int | None = None) -> np.ndarray:
    """Diagonal of the reduced (encoded-subspace) Hamiltonian over all 3ⁿ product states."""
    n = params.n_qutrits if n is None else n
    if n < 2:
        raise ParameterError("need n >= 2 qutrits")
    der = derive(params)
    levels = np.indices((QUTRIT_DIM,) * n).reshape(n, -1)
    control_f = levels[0] == F
    targets_e = np.sum(levels[1:] == E, axis=0)
    return np.where(control_f, der.stark_f1 + der.cross_shift * targets_e, 0.0)


def build_effective_hamiltonian_encoded(params: SystemParams, n: int | None = None) -> np.ndarray:
    """``(μ₁²/Δ₁)|f₁⟩⟨f₁| + (λ²/δ)|f₁⟩⟨f₁| Σ_j |e_j⟩⟨e_j|`` on the qutrit register."""
    return np.diag(encoded_energies(params, n)).astype(complex)


def encoded_projector(n: int) -> np.ndarray:
    """Projector onto control ∈ {g, f}, targets ∈ {g, e}."""
    control = np.diag([1.0, 0.0, 1.0])
    target = np.diag([1.0, 1.0, 0.0])
    return kron_all([control] + [target] * (n - 1)).real.astype(complex)


__all__ = [
    "G", "E", "F",
    "SystemParams", "DerivedParams", "derive", "matched_mu",
    "FullHamiltonian", "DispersiveHamiltonian",
    "build_full_hamiltonian", "build_dispersive_hamiltonian",
    "build_effective_hamiltonian_full", "build_effective_hamiltonian_encoded",
    "encoded_energies", "encoded_projector",
]
