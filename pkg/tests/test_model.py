import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from cavity_phase_gate.dynamics import EvolutionConfig, evolve_schrodinger
from cavity_phase_gate.errors import ParameterError
from cavity_phase_gate.model import (
    DispersiveHamiltonian,
    FullHamiltonian,
    SystemParams,
    build_dispersive_hamiltonian,
    build_effective_hamiltonian_encoded,
    build_effective_hamiltonian_full,
    build_full_hamiltonian,
    derive,
    encoded_projector,
    matched_mu,
)
from cavity_phase_gate.operators import E, F, G, QuantumState, hermiticity_error


def qidx(*levels):
    i = 0
    for q in levels:
        i = i * 3 + q
    return i


class TestDerive:
    def test_reference_detuning_difference(self):
        d = derive(SystemParams(delta1=10.7, delta_cap=8.4, mu=3.08))
        assert d.delta_small == pytest.approx(2.3, abs=1e-12)

    def test_lambda_value(self):
        # 1.54 * (1/8.4 + 1/10.7) evaluated by hand: 0.327259
        d = derive(SystemParams(delta1=10.7, delta_cap=8.4, mu=3.08))
        assert d.lam == pytest.approx(0.32726, abs=1e-5)

    def test_rounded_mu_leaves_residual(self):
        d = derive(SystemParams(delta1=10.7, delta_cap=8.4, mu=3.08))
        assert 1e-3 < d.matching_residual < 1e-2
        assert abs(d.gate_time - 2 * math.pi * 10.7) / (2 * math.pi * 10.7) == pytest.approx(0.0035, abs=5e-4)

    def test_matched_gate_time(self):
        p = SystemParams.paper_point()
        d = derive(p)
        assert d.matching_residual <= 1e-12
        assert d.gate_time == pytest.approx(2 * math.pi * 10.7, rel=1e-12)
        assert d.gate_time == pytest.approx(67.23, abs=5e-3)

    def test_degenerate(self):
        with pytest.raises(ParameterError, match="degenerate detunings"):
            SystemParams(delta1=10.7, delta_cap=10.7)


class TestMatchedMu:
    def test_reference_detunings(self):
        mu = matched_mu(10.7, 8.4, 1.0)
        assert mu == pytest.approx(3.0854, abs=1e-4)
        assert abs(mu - 3.08) < 0.01  # rounded value quoted for these detunings

    def test_root_finding_oracle(self):
        d1, dc, mu1 = 10.7, 8.4, 1.0

        def mismatch(mu):
            lam = 0.5 * mu * mu1 * (1 / dc + 1 / d1)
            return mu1**2 / d1 - 2 * lam**2 / (d1 - dc)

        root = brentq(mismatch, 0.1, 10.0, xtol=1e-15)
        assert matched_mu(d1, dc, mu1) == pytest.approx(root, rel=1e-12)

    def test_no_real_solution(self):
        with pytest.raises(ParameterError, match="no real solution"):
            matched_mu(10.7, 10.7, 1.0)
        with pytest.raises(ParameterError, match="no real solution"):
            matched_mu(8.0, 9.0, 1.0)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(2.0, 50.0), st.floats(0.05, 0.95), st.floats(0.1, 5.0), st.floats(0.01, 100.0))
    def test_feedback_and_scale_covariance(self, d1, frac, mu1, s):
        dc = frac * d1
        mu = matched_mu(d1, dc, mu1)
        assert derive(SystemParams(mu1=mu1, mu=mu, delta1=d1, delta_cap=dc)).matching_residual <= 1e-12
        assert matched_mu(s * d1, s * dc, s * mu1) == pytest.approx(s * mu, rel=1e-13)


class TestFullHamiltonian:
    def test_coupling_element(self, paper_params):
        space = paper_params.space()
        h = build_full_hamiltonian(paper_params, space, 0.0)
        row = space.index((F, G, G), 0)
        col = space.index((E, G, G), 1)
        assert h[row, col] == pytest.approx(paper_params.mu1)
        t = 0.37
        h = build_full_hamiltonian(paper_params, space, t)
        assert h[row, col] == pytest.approx(paper_params.mu1 * np.exp(1j * paper_params.delta1 * t))
        tcol = space.index((G, E, G), 2)
        trow = space.index((G, F, G), 1)
        assert h[trow, tcol] == pytest.approx(
            paper_params.mu * math.sqrt(2) * np.exp(1j * paper_params.delta_cap * t))

    def test_hermitian_at_random_times(self, paper_params):
        h = FullHamiltonian(paper_params)
        for t in np.random.default_rng(0).uniform(0, derive(paper_params).gate_time, 20):
            assert hermiticity_error(h(t)) <= 1e-12

    def test_ground_level_uncoupled(self, paper_params):
        space = paper_params.space()
        h = build_full_hamiltonian(paper_params, space, 1.3)
        ground = [i for i in range(space.dim) if space.unravel(i)[0][0] == G]
        others = [i for i in range(space.dim) if space.unravel(i)[0][0] != G]
        # qutrit 1 in |g> never couples to qutrit 1 in |e>/|f>
        assert np.all(h[np.ix_(ground, others)] == 0)

    def test_zero_coupling(self, paper_params):
        p = paper_params.replace(mu=0.0, mu1=0.0)
        assert np.all(build_full_hamiltonian(p, p.space(), 2.0) == 0)

    def test_apply_matches_matrix(self, paper_params):
        h = FullHamiltonian(paper_params)
        rng = np.random.default_rng(2)
        psi = rng.normal(size=h.space.dim) + 1j * rng.normal(size=h.space.dim)
        assert np.allclose(h.apply(4.2, psi), h(4.2) @ psi, atol=1e-13)

    def test_space_mismatch(self, paper_params):
        from cavity_phase_gate.operators import HilbertSpace

        with pytest.raises(ParameterError):
            FullHamiltonian(paper_params, HilbertSpace(2, 5))


class TestDispersiveHamiltonian:
    def test_photon_number_commutes(self, paper_params):
        h = DispersiveHamiltonian(paper_params)
        for t in (0.0, 1.1, 30.0):
            assert np.max(np.abs(h.number @ h(t) - h(t) @ h.number)) <= 1e-12

    def test_target_f_stark_shift_in_vacuum(self, paper_params):
        space = paper_params.space()
        h = build_dispersive_hamiltonian(paper_params, space, 0.0)
        i = space.index((G, F, G), 0)
        assert h[i, i].real == pytest.approx(paper_params.mu**2 / paper_params.delta_cap, rel=1e-14)

    def test_e_shift_with_photons(self, paper_params):
        space = paper_params.space()
        h = build_dispersive_hamiltonian(paper_params, space, 0.0)
        i = space.index((G, E, G), 2)
        assert h[i, i].real == pytest.approx(-2 * paper_params.mu**2 / paper_params.delta_cap)

    def test_hermitian(self, paper_params):
        h = DispersiveHamiltonian(paper_params)
        for t in np.random.default_rng(5).uniform(0, 70, 20):
            assert hermiticity_error(h(t)) <= 1e-12

    def test_photon_conservation_dynamics(self, paper_params):
        space = paper_params.space()
        psi = np.zeros(space.dim, complex)
        psi[space.index((F, E, E), 3)] = 0.6
        psi[space.index((F, G, E), 3)] = 0.8
        traj = evolve_schrodinger(DispersiveHamiltonian(paper_params), QuantumState(space, psi),
                                  20.0, EvolutionConfig.for_params(paper_params))
        assert np.max(np.abs(traj.photon_number - 3.0)) <= 1e-8


class TestEffectiveHamiltonians:
    def test_full_control_stark(self, paper_params):
        h = build_effective_hamiltonian_full(paper_params)
        i = qidx(F, G, G)
        assert h[i, i].real == pytest.approx(1 / 10.7, rel=1e-14)

    def test_full_target_flip_flop(self, paper_params):
        h = build_effective_hamiltonian_full(paper_params)
        val = paper_params.mu**2 / paper_params.delta_cap
        assert h[qidx(G, E, F), qidx(G, F, E)].real == pytest.approx(val, rel=1e-14)

    def test_full_conditioned_exchange(self, paper_params):
        h = build_effective_hamiltonian_full(paper_params)
        cross = derive(paper_params).cross_shift
        hop = paper_params.mu**2 / paper_params.delta_cap
        # σ_j⁻σ_k⁺ moves |f_j e_k⟩ → |e_j f_k⟩ while qutrit 1 is in |f⟩, on top of the
        # control-independent target flip-flop
        assert h[qidx(F, E, F), qidx(F, F, E)].real == pytest.approx(hop + cross, rel=1e-14)
        assert h[qidx(G, E, F), qidx(G, F, E)].real == pytest.approx(hop, rel=1e-14)
        # and cannot connect g/e target configurations
        assert h[qidx(F, E, G), qidx(F, G, E)] == 0

    def test_full_e1_branch(self, paper_params):
        h = build_effective_hamiltonian_full(paper_params)
        cross = derive(paper_params).cross_shift
        stark = paper_params.mu**2 / paper_params.delta_cap
        assert h[qidx(E, F, G), qidx(E, F, G)].real == pytest.approx(stark - cross, rel=1e-14)

    def test_full_hermitian(self, paper_params):
        assert hermiticity_error(build_effective_hamiltonian_full(paper_params)) <= 1e-12

    def test_encoded_values(self, paper_params):
        h = build_effective_hamiltonian_encoded(paper_params)
        d = derive(paper_params)
        assert h[qidx(F, E, G), qidx(F, E, G)].real == pytest.approx(0.140187, abs=1e-6)
        assert d.stark_f1 == pytest.approx(0.0934579, abs=1e-7)
        assert d.cross_shift == pytest.approx(0.0467290, abs=1e-7)
        assert h[qidx(F, E, E), qidx(F, E, E)].real == pytest.approx(d.stark_f1 + 2 * d.cross_shift)
        for rest in [(G, G), (E, F), (G, E)]:
            assert h[qidx(G, *rest), qidx(G, *rest)] == 0
        assert np.count_nonzero(h - np.diag(np.diag(h))) == 0

    def test_n_below_two(self, paper_params):
        with pytest.raises(ParameterError):
            build_effective_hamiltonian_full(paper_params, 1)
        with pytest.raises(ParameterError):
            build_effective_hamiltonian_encoded(paper_params, 1)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_projection_identity(self, paper_params, n):
        p = paper_params.replace(n_qutrits=n)
        h4 = build_effective_hamiltonian_full(p)
        h7 = build_effective_hamiltonian_encoded(p)
        proj = encoded_projector(n)
        assert np.max(np.abs(proj @ h4 @ proj - proj @ h7 @ proj)) <= 1e-14
        # the encoded subspace is invariant under the unreduced Hamiltonian
        assert np.max(np.abs(h4 @ proj - proj @ h4 @ proj)) <= 1e-14


class TestParams:
    @pytest.mark.parametrize("field,value", [("kappa", -0.1), ("gamma_fe", -1e-9),
                                             ("mu", -1.0), ("delta1", 0.0), ("n_qutrits", 1),
                                             ("fock_cutoff", 0)])
    def test_rejects_invalid(self, field, value):
        with pytest.raises(ParameterError):
            SystemParams(**{field: value})

    def test_uniform_gamma_convention(self):
        p = SystemParams.paper_point().with_uniform_gamma(2e-4)
        assert p.kappa == 0.01
        assert p.gamma_fe == p.gamma_eg == p.gamma_phi_e == p.gamma_phi_f == 2e-4
        assert p.gamma_fg == pytest.approx(2e-6)

    def test_zero_coupling_gate_time(self):
        assert math.isinf(derive(SystemParams(mu=0.0)).gate_time)
