import numpy as np
import pytest
from scipy.linalg import expm

from cavity_phase_gate.dynamics import (
    EvolutionConfig,
    LindbladGenerator,
    basis_state_fidelities,
    convergence_study,
    evolve_lindblad,
    evolve_schrodinger,
    gate_fidelity_ideal,
    gate_fidelity_lossy,
    run_gate_ideal,
    run_gate_lossy,
)
from cavity_phase_gate.errors import DimensionLimitError, NumericalError
from cavity_phase_gate.gate import encode, paper_input_state
from cavity_phase_gate.model import SystemParams
from cavity_phase_gate.operators import (
    E,
    F,
    G,
    DensityMatrix,
    HilbertSpace,
    QuantumState,
    annihilation,
    dagger,
    embed,
    ket,
    transition,
)

# Excitation number (photons + |f⟩ count) bounds the photon number by one for
# every encoded input, so cutoff 1 is exact and keeps master-equation tests fast.
FAST = dict(fock_cutoff=1)


def basis(space, levels, photons=0):
    amps = np.zeros(space.dim, complex)
    amps[space.index(levels, photons)] = 1
    return QuantumState(space, amps)


class TestSchrodinger:
    def test_zero_hamiltonian(self):
        space = HilbertSpace(2, 1)
        psi = paper_input_state(space)
        traj = evolve_schrodinger(lambda t: np.zeros((18, 18)), psi, 5.0)
        assert np.allclose(traj.final.amplitudes, psi.amplitudes, atol=1e-14)

    def test_diagonal_phases(self):
        space = HilbertSpace(2, 1)
        rng = np.random.default_rng(0)
        omega = rng.uniform(-3, 3, space.dim)
        psi = QuantumState.normalized(space, rng.normal(size=space.dim) + 0j)
        t = 7.3
        traj = evolve_schrodinger(lambda _t: np.diag(omega), psi, t,
                                  EvolutionConfig(rtol=1e-10, atol=1e-12))
        assert np.max(np.abs(traj.final.amplitudes - psi.amplitudes * np.exp(-1j * omega * t))) <= 1e-9

    def test_resonant_rabi_transfer(self):
        space = HilbertSpace(2, 1)
        mu = 1.7
        a = embed(annihilation(1), "cavity", space)
        coupling = a @ embed(transition(F, E), 1, space)
        h = mu * (coupling + dagger(coupling))
        t = np.pi / (2 * mu)
        traj = evolve_schrodinger(lambda _t: h, basis(space, (E, G), 1), t)
        pop = abs(traj.final.amplitudes[space.index((F, G), 0)]) ** 2
        assert pop == pytest.approx(1.0, abs=1e-6)

    def test_trajectory_layout(self, ideal_run):
        traj = ideal_run.trajectory
        assert traj.times[0] == 0.0
        assert traj.times[-1] == pytest.approx(ideal_run.gate_time, rel=1e-14)
        assert np.all(np.diff(traj.times) > 0)
        assert len(traj.times) == 200
        assert np.allclose(traj.populations.sum(axis=-1), traj.norm[:, None] ** 2, atol=1e-12)

    def test_norm_drift(self, ideal_run):
        assert ideal_run.drift <= 1e-7

    def test_step_guard(self, paper_params):
        with pytest.raises(NumericalError, match="guard"):
            run_gate_ideal(paper_params, cfg=EvolutionConfig.for_params(paper_params, max_steps=5))

    def test_drift_failure_reported(self, paper_params):
        cfg = EvolutionConfig(method="RK23", rtol=1e-3, atol=1e-3, drift_tol=1e-9)
        with pytest.raises(NumericalError, match="integrator accuracy failure"):
            run_gate_ideal(paper_params, cfg=cfg)


class TestLindblad:
    def test_zero_rates_match_schrodinger(self):
        p = SystemParams.paper_point(**FAST)
        ideal = run_gate_ideal(p)
        lossy = run_gate_lossy(p)
        rho_fid = np.vdot(ideal.trajectory.final.amplitudes,
                          lossy.trajectory.final.matrix @ ideal.trajectory.final.amplitudes).real
        assert rho_fid / ideal.trajectory.final.norm ** 2 >= 1 - 1e-6
        assert abs(lossy.fidelity - ideal.fidelity) <= 1e-6

    def test_cavity_decay(self):
        kappa = 0.3
        p = SystemParams(mu=0.0, mu1=0.0, kappa=kappa, fock_cutoff=2)
        space = p.space()
        rho0 = basis(space, (G, G, G), 1).density_matrix()
        traj = evolve_lindblad(p, rho0, 6.0, EvolutionConfig(rtol=1e-9, atol=1e-11))
        assert np.max(np.abs(traj.photon_number - np.exp(-kappa * traj.times))) <= 1e-6

    def test_f_dephasing_against_single_qutrit_oracle(self):
        gamma = 0.4
        t = 3.0
        p = SystemParams(n_qutrits=2, mu=0.0, mu1=0.0, gamma_phi_f=gamma, fock_cutoff=1)
        space = p.space()
        q1 = (ket(G) + 0.6 * ket(E) + ket(F)) / np.sqrt(2.36)
        psi = QuantumState.product(space, [q1, ket(G)])
        traj = evolve_lindblad(p, psi.density_matrix(), t, EvolutionConfig(rtol=1e-10, atol=1e-12))
        reduced = traj.final.matrix.reshape(3, 6, 3, 6).trace(axis1=1, axis2=3)

        # brute-force 9×9 generator for one qutrit: dρ_ij = γ(P_iP_j - (P_i + P_j)/2) ρ_ij
        is_f = [0, 0, 1]
        gen = np.zeros((9, 9))
        for i in range(3):
            for j in range(3):
                gen[3 * i + j, 3 * i + j] = gamma * (is_f[i] * is_f[j] - 0.5 * (is_f[i] + is_f[j]))
        rho_exact = (expm(gen * t) @ np.outer(q1, q1.conj()).reshape(-1)).reshape(3, 3)
        assert np.max(np.abs(reduced - rho_exact)) <= 1e-8
        assert abs(reduced[G, F]) == pytest.approx(abs(q1[G] * q1[F]) * np.exp(-gamma * t / 2), abs=1e-8)

    def test_relaxation_channels(self):
        p = SystemParams(mu=0.0, mu1=0.0, gamma_fe=0.2, gamma_fg=0.05, gamma_eg=0.1, fock_cutoff=1)
        space = p.space()
        rho0 = basis(space, (F, G, G)).density_matrix()
        t = 4.0
        traj = evolve_lindblad(p, rho0, t, EvolutionConfig(rtol=1e-10, atol=1e-12))
        pf = traj.populations[-1, 0, F]
        assert pf == pytest.approx(np.exp(-0.25 * t), abs=1e-8)
        # |e⟩ fed at 0.2·p_f, drained at 0.1
        pe = 0.2 / (0.25 - 0.1) * (np.exp(-0.1 * t) - np.exp(-0.25 * t))
        assert traj.populations[-1, 0, E] == pytest.approx(pe, abs=1e-8)

    def test_lossy_state_is_physical(self):
        p = SystemParams.paper_point(**FAST).with_uniform_gamma(1e-3)
        run = run_gate_lossy(p)
        diag = run.trajectory.final.validate()
        assert diag["ok"], diag
        assert run.drift <= 1e-7

    def test_density_dimension_cap(self):
        with pytest.raises(DimensionLimitError):
            LindbladGenerator(SystemParams(n_qutrits=5, fock_cutoff=5))

    def test_absurd_loss(self):
        p = SystemParams.paper_point(**FAST).with_uniform_gamma(10.0)
        assert gate_fidelity_lossy(p) < 0.5


class TestGatePipelines:
    def test_no_coupling_trivial(self):
        p = SystemParams(mu=0.0, mu1=0.0)
        assert gate_fidelity_ideal(p, "000", duration=50.0) == pytest.approx(1.0, abs=1e-12)

    def test_cutoff_doubling(self, ideal_run, paper_params):
        doubled = gate_fidelity_ideal(paper_params.replace(fock_cutoff=10))
        assert abs(doubled - ideal_run.fidelity) < 1e-4

    def test_signs_of_basis_states(self):
        table = basis_state_fidelities(SystemParams.paper_point(**FAST))
        phases = {k: v["phase_over_pi"] for k, v in table.items()}
        # control-|g⟩ states are untouched
        for bits in ("000", "001", "010", "011"):
            assert table[bits]["overlap"] == pytest.approx(1.0, abs=1e-9)
        # sign pattern: single-target flips near π, double flip near 2π ≡ 0
        assert abs(abs(phases["101"]) - 1) < 0.15 and abs(abs(phases["110"]) - 1) < 0.15
        assert abs(phases["111"]) < 0.15 and abs(phases["100"]) < 0.15


class TestConvergence:
    def test_paper_point(self, paper_params):
        rep = convergence_study(paper_params)
        assert rep.converged and rep.cutoff <= 8
        diffs = [r["difference"] for r in rep.rows if r["difference"] is not None]
        assert all(d < 1e-4 for d in diffs[-1:])

    def test_no_coupling(self):
        rep = convergence_study(SystemParams(mu=0.0, mu1=0.0), "000", duration=20.0)
        assert rep.converged and rep.cutoff == 1

    def test_tolerance_insensitive(self, paper_params):
        p = paper_params.replace(fock_cutoff=1)
        loose = gate_fidelity_ideal(p, cfg=EvolutionConfig.for_params(p, rtol=1e-6))
        tight = gate_fidelity_ideal(p, cfg=EvolutionConfig.for_params(p, rtol=1e-10))
        assert abs(loose - tight) < 1e-5
