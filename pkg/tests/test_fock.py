import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from gkpgen import fock
from gkpgen.errors import (
    InvalidDimensionError,
    InvalidParameterError,
    TruncationError,
)


def lower_block_maxnorm(m):
    d = m.shape[0] // 2
    return np.max(np.abs(m[:d, :d]))


class TestLadderAndQuadratures:
    def test_ladder_entries(self):
        a, adag, q, p = fock.ladder_and_quadratures(3)
        assert a.matrix[0, 1] == pytest.approx(1.0)
        assert a.matrix[1, 2] == pytest.approx(np.sqrt(2), abs=1e-12)

    def test_vacuum_q_moments(self):
        vac = fock.vacuum(20)
        mean, var = fock.quad_moments(vac, "q")
        assert mean == pytest.approx(0.0, abs=1e-14)
        assert var == pytest.approx(0.5, abs=1e-14)

    def test_commutator_on_lower_block(self):
        for cutoff in (20, 40):
            _, _, q, p = fock.ladder_and_quadratures(cutoff)
            comm = q.matrix @ p.matrix - p.matrix @ q.matrix
            defect = comm - 1j * np.eye(cutoff)
            assert lower_block_maxnorm(defect) < 1e-8

    def test_rejects_small_cutoff(self):
        with pytest.raises(InvalidDimensionError):
            fock.ladder_and_quadratures(1)


class TestGaussianUnitaries:
    def test_displacement_vacuum_overlap(self):
        d = fock.build_gaussian_unitary("displacement", 40, alpha=1.0)
        assert abs(d.matrix[0, 0]) == pytest.approx(np.exp(-0.5), abs=1e-10)
        assert d.matrix[0, 0].real == pytest.approx(0.606531, abs=1e-6)

    def test_squeezed_vacuum_variance(self):
        state = fock.make_squeezed_vacuum(0.5, cutoff=40)
        _, var = fock.quad_moments(state, "q")
        assert var == pytest.approx(np.exp(-1.0) / 2, abs=1e-10)
        assert var == pytest.approx(0.183940, abs=1e-6)

    def test_single_photon_beamsplitter(self):
        b = fock.build_gaussian_unitary("beamsplitter", 4, theta=np.pi / 4, phi=0.0)
        psi = fock.product_state(fock.fock(1, 4), fock.fock(0, 4))
        out = b.matrix @ psi.amplitudes
        st10 = out.reshape(4, 4)[1, 0]
        st01 = out.reshape(4, 4)[0, 1]
        assert abs(st10) ** 2 == pytest.approx(0.5, abs=1e-10)
        assert abs(st01) ** 2 == pytest.approx(0.5, abs=1e-10)
        assert st10 == pytest.approx(np.cos(np.pi / 4), abs=1e-10)

    def test_zero_parameter_gates_are_identity(self):
        for kind, params in [
            ("displacement", {"alpha": 0.0}),
            ("squeeze", {"r": 0.0}),
            ("rotate", {"theta": 0.0}),
        ]:
            u = fock.build_gaussian_unitary(kind, 12, **params)
            np.testing.assert_allclose(u.matrix, np.eye(12), atol=1e-12)

    def test_unitarity_lower_block(self):
        for kind, params in [
            ("displacement", {"alpha": 0.7 + 0.2j}),
            ("squeeze", {"r": 0.6, "theta_r": 1.1}),
            ("rotate", {"theta": 0.9}),
        ]:
            u = fock.build_gaussian_unitary(kind, 40, **params).matrix
            defect = u.conj().T @ u - np.eye(40)
            assert lower_block_maxnorm(defect) < 1e-8

    def test_nonfinite_parameter_rejected(self):
        with pytest.raises(InvalidParameterError):
            fock.build_gaussian_unitary("squeeze", 10, r=np.inf)


class TestTwoModeGates:
    def test_bs_conserves_photon_number(self):
        rng = np.random.default_rng(7)
        amps = rng.normal(size=64) + 1j * rng.normal(size=64)
        state = fock.FockState(amps / np.linalg.norm(amps), 8, 2)
        out = fock.apply_two_mode_gate(state, "beamsplitter", theta=0.43, phi=0.2)
        assert fock.mean_photon(out) == pytest.approx(fock.mean_photon(state), abs=1e-10)

    @pytest.mark.parametrize("kind,params", [
        ("beamsplitter", {"theta": 0.61, "phi": 0.37}),
        ("cz", {"g": 0.8}),
    ])
    def test_matches_dense_exponential_small_cutoff(self, kind, params):
        cutoff = 8
        rng = np.random.default_rng(11)
        amps = rng.normal(size=cutoff ** 2) + 1j * rng.normal(size=cutoff ** 2)
        state = fock.FockState(amps / np.linalg.norm(amps), cutoff, 2)
        fast = fock.apply_two_mode_gate(state, kind, **params)
        dense = fock.build_gaussian_unitary(kind, cutoff, **params)
        expected = dense.matrix @ state.amplitudes
        np.testing.assert_allclose(fast.amplitudes, expected, atol=1e-8)

    def test_cz_zero_weight_is_identity(self):
        state = fock.product_state(fock.fock(2, 10), fock.fock(3, 10))
        out = fock.apply_two_mode_gate(state, "cz", g=0.0)
        np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-12)

    def test_truncation_flag_raised_on_boundary_states(self):
        cutoff = 10
        psi = fock.product_state(fock.fock(9, cutoff), fock.fock(8, cutoff))
        flags = []
        fock.apply_two_mode_gate(psi, "beamsplitter", flags=flags, theta=np.pi / 4)
        assert any(f.startswith("truncation") for f in flags)


def wigner_by_quadrature_integral(state, q, p):
    """Independent oracle: W(q,p) = (1/pi) ∫ dy e^{2ipy} psi(q-y) psi*(q+y)."""
    from gkpgen.measurement import hermite_wavefunctions

    ys = np.linspace(-10, 10, 4001)
    dy = ys[1] - ys[0]
    psi_m = hermite_wavefunctions(state.cutoff - 1, q - ys).T @ state.amplitudes
    psi_p = hermite_wavefunctions(state.cutoff - 1, q + ys).T @ state.amplitudes
    integrand = np.exp(2j * p * ys) * psi_m * np.conj(psi_p)
    return float(np.real(np.sum(integrand) * dy / np.pi))


class TestWigner:
    def test_vacuum_origin(self):
        w = fock.wigner_map(fock.vacuum(10), np.array([0.0]), np.array([0.0]))
        assert w[0, 0] == pytest.approx(1 / np.pi, abs=1e-10)

    def test_single_photon_negativity(self):
        w = fock.wigner_map(fock.fock(1, 10), np.array([0.0]), np.array([0.0]))
        assert w[0, 0] == pytest.approx(-1 / np.pi, abs=1e-10)

    def test_vacuum_gaussian_profile(self):
        qs = np.linspace(-2, 2, 5)
        ps = np.linspace(-2, 2, 5)
        w = fock.wigner_map(fock.vacuum(12), qs, ps)
        expected = np.exp(-(qs[:, None] ** 2 + ps[None, :] ** 2)) / np.pi
        np.testing.assert_allclose(w, expected, atol=1e-10)

    def test_normalization_random_state(self):
        rng = np.random.default_rng(3)
        amps = rng.normal(size=20) + 1j * rng.normal(size=20)
        state = fock.FockState(amps / np.linalg.norm(amps), 20)
        grid = np.linspace(-8, 8, 161)
        w = fock.wigner_map(state, grid, grid)
        total = w.sum() * (grid[1] - grid[0]) ** 2
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_matches_quadrature_integral_oracle(self):
        rng = np.random.default_rng(5)
        amps = rng.normal(size=6) + 1j * rng.normal(size=6)
        state = fock.FockState(amps / np.linalg.norm(amps), 6)
        for q, p in [(0.0, 0.0), (0.7, -0.4), (-1.2, 0.9)]:
            got = fock.wigner_map(state, np.array([q]), np.array([p]))[0, 0]
            assert got == pytest.approx(wigner_by_quadrature_integral(state, q, p), abs=1e-6)

    def test_coverage_warning_on_small_grid(self):
        state = fock.make_cat(2.0, 0.0, cutoff=30)
        grid = np.linspace(-1, 1, 21)
        with pytest.warns(UserWarning, match="cover"):
            fock.wigner_map(state, grid, grid)


class TestMetricsAndConstructors:
    def test_self_fidelity(self):
        state = fock.make_cat(1.5, 0.1, cutoff=40)
        assert fock.fidelity(state, state) == pytest.approx(1.0, abs=1e-12)

    def test_parity_values(self):
        assert fock.parity_expectation(fock.fock(1, 10)) == pytest.approx(-1.0)
        assert fock.parity_expectation(fock.vacuum(10)) == pytest.approx(1.0)

    def test_cat_mean_photon_analytic(self):
        alpha = 2.0
        state = fock.make_cat(alpha, 0.0, cutoff=40)
        expected = alpha ** 2 * np.tanh(alpha ** 2)
        assert fock.mean_photon(state) == pytest.approx(expected, abs=1e-8)

    def test_mismatched_dimensions(self):
        with pytest.raises(InvalidDimensionError):
            fock.state_metrics(fock.vacuum(10), fock.vacuum(12))

    def test_even_cat_matches_coherent_superposition(self):
        alpha, cutoff = 2.0, 40
        cat = fock.make_cat(alpha, 0.0, cutoff=cutoff)
        dplus = fock.displacement_matrix(cutoff, alpha)
        vac = np.zeros(cutoff, dtype=complex)
        vac[0] = 1.0
        ref = dplus @ vac + dplus.conj().T @ vac
        ref = fock.FockState(ref / np.linalg.norm(ref), cutoff)
        assert fock.fidelity(cat, ref) == pytest.approx(1.0, abs=1e-10)

    def test_odd_cat_small_alpha_is_single_photon(self):
        state = fock.make_cat(0.01, 0.0, parity="odd", cutoff=20)
        assert fock.fidelity(state, fock.fock(1, 20)) > 0.999

    def test_squeezed_vacuum_zero_r_is_vacuum(self):
        state = fock.make_squeezed_vacuum(0.0, cutoff=20)
        assert fock.fidelity(state, fock.vacuum(20)) == pytest.approx(1.0, abs=1e-12)

    def test_cat_parity_expectation(self):
        even = fock.make_cat(1.8, 0.2, "even", cutoff=40)
        odd = fock.make_cat(1.8, 0.2, "odd", cutoff=40)
        assert fock.parity_expectation(even) == pytest.approx(1.0, abs=1e-8)
        assert fock.parity_expectation(odd) == pytest.approx(-1.0, abs=1e-8)

    def test_cat_leakage_raises(self):
        with pytest.raises(TruncationError):
            fock.make_cat(5.0, 0.5, cutoff=20)


class TestCorrectedAmplitude:
    def test_examples(self):
        assert fock.corrected_amplitude(2.0, 0.5) == pytest.approx(3.29744, abs=1e-5)
        assert fock.corrected_amplitude(3.0, 0.0) == pytest.approx(3.0)
        assert fock.corrected_amplitude(2.0, -0.3) == pytest.approx(1.48164, abs=1e-5)

    @given(st.floats(-5, 5), st.floats(-2, 2))
    @settings(max_examples=50, deadline=None)
    def test_group_property(self, alpha, r):
        lhs = fock.corrected_amplitude(alpha, r) * fock.corrected_amplitude(1.0, -r)
        assert lhs == pytest.approx(alpha, abs=1e-9, rel=1e-9)


class TestEffectiveSqueezing:
    def test_vacuum_reads_zero_db(self):
        vac = fock.vacuum(40)
        for u in (np.sqrt(np.pi), np.sqrt(2 * np.pi)):
            for quad in ("q", "p"):
                res = fock.effective_squeezing(vac, u, quad)
                assert res.delta == pytest.approx(0.5, abs=1e-7)
                assert abs(res.db) < 1e-6

    def test_vacuum_displacement_trace_analytic(self):
        # <0|e^{iuq}|0> = e^{-u^2/4}
        u = 1.3
        op = fock.exp_iuq_matrix(40, u, "q")
        vac = fock.vacuum(40)
        val = np.vdot(vac.amplitudes, op @ vac.amplitudes)
        assert abs(val) == pytest.approx(np.exp(-u ** 2 / 4), abs=1e-10)

    def test_squeezed_vacuum_value(self):
        state = fock.make_squeezed_vacuum(0.5, cutoff=60)
        res = fock.effective_squeezing(state, np.sqrt(2 * np.pi), "q")
        assert res.delta == pytest.approx(np.exp(-0.5) / 2, abs=1e-4)
        assert res.db == pytest.approx(4.342945, abs=5e-3)

    def test_table_scale_consistency(self):
        # 0.5 nats of squeezing reads 4.34 dB, the Table I bound at r = 11.5 dB
        assert fock.nats_to_db(0.5) == pytest.approx(4.342945, abs=1e-6)

    def test_zero_u_rejected(self):
        with pytest.raises(InvalidParameterError):
            fock.effective_squeezing(fock.vacuum(10), 0.0)


class TestSqueezingConversions:
    def test_paper_conclusion_correspondence(self):
        pair = fock.cluster_from_source_db(14.5)
        assert pair.r_db == pytest.approx(11.5, abs=0.05)

    def test_zero_source(self):
        pair = fock.cluster_from_source(1e-12)
        assert pair.epsilon == pytest.approx(1.0, abs=1e-9)
        assert pair.r_nats == pytest.approx(0.0, abs=1e-9)

    def test_one_nat_example(self):
        pair = fock.cluster_from_source(1.0)
        assert pair.epsilon == pytest.approx(0.26580, abs=1e-5)
        # direct evaluation: r = ½·ln(1/sech 2) = 0.662501 (0.66246 if ε is
        # first rounded to 5 digits)
        assert pair.r_nats == pytest.approx(0.5 * np.log(np.cosh(2.0)), rel=1e-12)
        assert pair.r_nats == pytest.approx(0.66250, abs=1e-5)

    def test_round_trip(self):
        for r_db in (11.0, 11.5, 12.5):
            pair = fock.cluster_from_cluster_db(r_db)
            back = fock.cluster_from_source(pair.r0_nats)
            assert back.r_db == pytest.approx(r_db, abs=1e-9)

    @given(st.floats(0.01, 3.0))
    @settings(max_examples=50, deadline=None)
    def test_db_nat_round_trip_exact(self, r):
        assert fock.db_to_nats(fock.nats_to_db(r)) == pytest.approx(r, rel=1e-12)


class TestPadAndLeakage:
    def test_pad_preserves_amplitudes(self):
        state = fock.make_cat(1.0, 0.0, cutoff=20)
        padded = fock.pad_cutoff(state, 30)
        np.testing.assert_allclose(padded.amplitudes[:20], state.amplitudes)
        assert abs(padded.norm - 1.0) < 1e-12

    def test_boundary_mass_two_mode(self):
        state = fock.product_state(fock.fock(9, 10), fock.fock(0, 10))
        assert fock.boundary_mass(state) == pytest.approx(1.0)
