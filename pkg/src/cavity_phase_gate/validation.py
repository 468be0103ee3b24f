"""Invariant checks executed by the ``validate`` run mode.

Each check returns a dict with ``check``, ``status``, ``measured`` and
``threshold``.  ``CHECKLIST`` maps every module to the checks covering it;
the report carries it so coverage is visible in the output.
"""
from __future__ import annotations

import math

import numpy as np

from .dynamics import (
    EvolutionConfig,
    basis_state_fidelities,
    closed_form_fidelity,
    evolve_schrodinger,
    propagator,
    run_gate_ideal,
    run_gate_lossy,
)
from .errors import GateSimError, ParameterError
from .gate import (
    closed_form_unitary,
    ideal_gate_matrix,
    ideal_output_state,
    logical_restriction,
    paper_input_state,
)
from .model import (
    DispersiveHamiltonian,
    FullHamiltonian,
    SystemParams,
    build_effective_hamiltonian_encoded,
    build_effective_hamiltonian_full,
    derive,
    encoded_projector,
    matched_mu,
)
from .operators import (
    E,
    F,
    G,
    HilbertSpace,
    DensityMatrix,
    QuantumState,
    annihilation,
    dagger,
    embed,
    hermiticity_error,
    kron,
    pure_state_fidelity,
)

CHECKLIST = {
    "operator-algebra": ["kron_associativity", "embed_disjoint_commutation",
                         "annihilation_commutator", "fidelity_linearity_and_phase"],
    "system-model": ["projection_identity", "projection_invariance", "hamiltonian_hermiticity",
                     "zero_coupling_hamiltonian", "photon_number_commutes_dispersive",
                     "photon_number_conservation_dynamics", "matched_mu_scale_covariance",
                     "matching_residual", "degenerate_detuning_rejected"],
    "ideal-gate": ["oracle_equivalence", "gate_realization", "ideal_gate_involutory",
                   "ideal_output_norm"],
    "dynamics": ["schrodinger_norm_drift", "virtual_photon_bound", "paper_point_fidelity",
                 "effective_model_agreement", "truth_table", "lindblad_trace_drift",
                 "lindblad_hermiticity", "lindblad_positivity", "zero_rate_reduction"],
}


def _check(name, measured, threshold, passed, module, note=""):
    out = {"check": name, "status": "pass" if passed else "fail", "module": module,
           "measured": measured, "threshold": threshold}
    if note:
        out["note"] = note
    return out


def _rand_c(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def operator_checks(rng: np.random.Generator) -> list[dict]:
    m = "operator-algebra"
    a, b, c = _rand_c(rng, 2, 3), _rand_c(rng, 3, 2), _rand_c(rng, 2, 2)
    assoc = np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c))))

    space = HilbertSpace(3, 2)
    x = embed(_rand_c(rng, 3, 3), 1, space)
    y = embed(_rand_c(rng, 3, 3), 3, space)
    z = embed(_rand_c(rng, 3, 3), "cavity", space)
    comm = max(np.max(np.abs(x @ y - y @ x)), np.max(np.abs(x @ z - z @ x)))

    ann = annihilation(5)
    expected = np.eye(6)
    expected[5, 5] = -5
    # (√n)² is not exact in binary floating point; allow a few ulps.
    ccr = np.max(np.abs(ann @ dagger(ann) - dagger(ann) @ ann - expected))

    small = HilbertSpace(2, 1)
    psi = QuantumState.normalized(small, _rand_c(rng, small.dim))
    r1 = QuantumState.normalized(small, _rand_c(rng, small.dim)).density_matrix()
    r2 = QuantumState.normalized(small, _rand_c(rng, small.dim)).density_matrix()
    mix = DensityMatrix(small, 0.3 * r1.matrix + 0.7 * r2.matrix)
    lin = abs(pure_state_fidelity(psi, mix) - 0.3 * pure_state_fidelity(psi, r1)
              - 0.7 * pure_state_fidelity(psi, r2))
    phased = QuantumState(small, np.exp(0.77j) * psi.amplitudes)
    lin = max(lin, abs(pure_state_fidelity(phased, mix) - pure_state_fidelity(psi, mix)))
    return [
        _check("kron_associativity", assoc, 1e-14, assoc <= 1e-14, m),
        _check("embed_disjoint_commutation", comm, 1e-12, comm <= 1e-12, m),
        _check("annihilation_commutator", ccr, 1e-14, ccr <= 1e-14, m),
        _check("fidelity_linearity_and_phase", lin, 1e-14, lin <= 1e-14, m),
    ]


def model_checks(params: SystemParams, rng: np.random.Generator) -> list[dict]:
    m = "system-model"
    out = []
    ident, invar = 0.0, 0.0
    for n in (2, 3, 4):
        p = params.replace(n_qutrits=n)
        h4 = build_effective_hamiltonian_full(p)
        h7 = build_effective_hamiltonian_encoded(p)
        proj = encoded_projector(n)
        ident = max(ident, np.max(np.abs(proj @ h4 @ proj - proj @ h7 @ proj)))
        invar = max(invar, np.max(np.abs((np.eye(3**n) - proj) @ h4 @ proj)))
    out.append(_check("projection_identity", ident, 1e-14, ident <= 1e-14, m))
    out.append(_check("projection_invariance", invar, 1e-14, invar <= 1e-14, m))

    space = params.space()
    t_g = derive(params).gate_time
    full, disp = FullHamiltonian(params, space), DispersiveHamiltonian(params, space)
    herm = 0.0
    for t in rng.uniform(0, t_g, 20):
        herm = max(herm, hermiticity_error(full(t)), hermiticity_error(disp(t)))
    herm = max(herm, hermiticity_error(build_effective_hamiltonian_full(params)),
               hermiticity_error(build_effective_hamiltonian_encoded(params)))
    out.append(_check("hamiltonian_hermiticity", herm, 1e-12, herm <= 1e-12, m))

    zero = np.max(np.abs(FullHamiltonian(params.replace(mu=0.0, mu1=0.0), space)(1.234)))
    out.append(_check("zero_coupling_hamiltonian", zero, 0.0, zero == 0.0, m))

    num = disp.number
    comm = max(np.max(np.abs(num @ disp(t) - disp(t) @ num)) for t in rng.uniform(0, t_g, 5))
    out.append(_check("photon_number_commutes_dispersive", comm, 1e-12, comm <= 1e-12, m))

    # start from a photon-number eigenstate with an active exchange channel
    n_ph = min(2, space.fock_cutoff)
    psi0 = np.zeros(space.dim, dtype=complex)
    psi0[space.index((F, E, E), n_ph)] = 1 / np.sqrt(2)
    psi0[space.index((F, E, G), n_ph)] = 1 / np.sqrt(2)
    traj = evolve_schrodinger(disp, QuantumState(space, psi0), t_g / 4,
                              EvolutionConfig.for_params(params))
    cons = float(np.max(np.abs(traj.photon_number - n_ph)))
    out.append(_check("photon_number_conservation_dynamics", cons, 1e-8, cons <= 1e-8, m))

    d1, dc, mu1 = params.delta1, params.delta_cap, params.mu1
    base = matched_mu(d1, dc, mu1)
    cov = max(abs(matched_mu(s * d1, s * dc, s * mu1) - s * base) / (s * base) for s in (0.5, 3.0, 17.0))
    out.append(_check("matched_mu_scale_covariance", cov, 1e-14, cov <= 1e-14, m))

    if d1 > dc:
        res = derive(params.replace(mu=base)).matching_residual
        out.append(_check("matching_residual", res, 1e-12, res <= 1e-12, m))
    try:
        SystemParams(delta1=5.0, delta_cap=5.0)
        rejected, msg = False, "accepted"
    except ParameterError as exc:
        rejected, msg = "degenerate detunings" in str(exc), str(exc)
    out.append(_check("degenerate_detuning_rejected", msg, "degenerate detunings", rejected, m))
    return out


def gate_checks(params: SystemParams, rng: np.random.Generator) -> list[dict]:
    m = "ideal-gate"
    n = params.n_qutrits
    worst = 0.0
    for _ in range(10):
        d1 = rng.uniform(5, 20)
        dc = rng.uniform(1, d1 - 0.5)
        p = SystemParams(n_qutrits=n, mu1=rng.uniform(0.5, 2), mu=rng.uniform(0.5, 4),
                         delta1=d1, delta_cap=dc)
        t = rng.uniform(0, 2 * derive(p).gate_time)
        h = build_effective_hamiltonian_encoded(p)
        num = propagator(lambda _t: h, h.shape[0], t)
        worst = max(worst, np.max(np.abs(num - closed_form_unitary(p, n, t))))
    out = [_check("oracle_equivalence", worst, 1e-8, worst <= 1e-8, m)]

    if params.delta1 > params.delta_cap:
        matched = params.replace(mu=matched_mu(params.delta1, params.delta_cap, params.mu1))
        u = closed_form_unitary(matched, n, derive(matched).gate_time)
        err = np.max(np.abs(logical_restriction(u, n) - ideal_gate_matrix(n)))
        out.append(_check("gate_realization", err, 1e-10, err <= 1e-10, m))
    g = ideal_gate_matrix(n)
    inv = np.max(np.abs(g @ g - np.eye(2**n)))
    out.append(_check("ideal_gate_involutory", inv, 0.0, inv == 0.0, m))
    psi = paper_input_state(params.space())
    dn = abs(ideal_output_state(psi).norm - 1.0)
    out.append(_check("ideal_output_norm", dn, 1e-12, dn <= 1e-12, m))
    return out


def dynamics_checks(params: SystemParams, include_lossy: bool = True) -> list[dict]:
    m = "dynamics"
    out = []
    ideal = run_gate_ideal(params)
    out.append(_check("schrodinger_norm_drift", ideal.drift, 1e-7, ideal.drift <= 1e-7, m))
    out.append(_check("virtual_photon_bound", ideal.max_photon, 0.05, ideal.max_photon <= 0.05, m))
    out.append(_check("paper_point_fidelity", ideal.fidelity, 0.99, ideal.fidelity >= 0.99, m))
    cf = closed_form_fidelity(params)
    gap = abs(ideal.fidelity - cf)
    out.append(_check("effective_model_agreement", gap, 0.01, gap <= 0.01, m,
                      note=f"full={ideal.fidelity:.6f} closed_form={cf:.6f}"))
    table = basis_state_fidelities(params)
    worst = min(v["overlap"] for v in table.values())
    out.append(_check("truth_table", {k: v["overlap"] for k, v in table.items()}, 0.99,
                      worst >= 0.99, m, note=f"worst overlap {worst:.6f}"))
    if include_lossy:
        lossless = params.replace(kappa=0.0, gamma_fe=0.0, gamma_fg=0.0, gamma_eg=0.0,
                                  gamma_phi_f=0.0, gamma_phi_e=0.0)
        zero = run_gate_lossy(lossless)
        gap = abs(zero.fidelity - ideal.fidelity)
        out.append(_check("zero_rate_reduction", gap, 1e-6, gap <= 1e-6, m))
        lossy = run_gate_lossy(params.with_uniform_gamma(2e-4))
        diag = lossy.trajectory.final.validate()
        out.append(_check("lindblad_trace_drift", lossy.drift, 1e-7, lossy.drift <= 1e-7, m))
        out.append(_check("lindblad_hermiticity", diag["hermiticity"], 1e-9,
                          diag["hermiticity"] <= 1e-9, m))
        out.append(_check("lindblad_positivity", diag["min_eigenvalue"], -1e-7,
                          diag["min_eigenvalue"] >= -1e-7, m))
    return out


def run_checks(params: SystemParams, include_slow: bool = True, seed: int = 0) -> list[dict]:
    rng = np.random.default_rng(seed)
    checks = []
    for fn, args in ((operator_checks, (rng,)), (model_checks, (params, rng)),
                     (gate_checks, (params, rng))):
        try:
            checks += fn(*args)
        except GateSimError as exc:
            checks.append(_check(fn.__name__, str(exc), "no error", False, "validation"))
    try:
        checks += dynamics_checks(params, include_lossy=include_slow)
    except GateSimError as exc:
        checks.append(_check("dynamics_checks", str(exc), "no error", False, "dynamics"))
    from .experiments import physical_units_report

    for c in physical_units_report().checks():
        c["module"] = "experiments-cli"
        checks.append(c)
    if not math.isfinite(derive(params).gate_time):
        checks.append(_check("gate_time_finite", "inf", "finite", False, "system-model"))
    return checks
