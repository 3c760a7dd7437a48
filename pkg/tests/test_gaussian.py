import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from gaussbath.errors import InstabilityError, InvalidDimensionError, InvalidStateError
from gaussbath.gaussian import (
    QuadraticHamiltonian,
    check_state,
    direct_sum,
    entropy,
    entropy_function,
    mean_energy,
    mutual_information,
    normal_modes,
    reduced_state,
    symplectic_eigenvalues,
    symplectic_form,
    thermal_nu,
    thermal_state,
    williamson,
)


def random_symplectic(n, rng, scale=0.5):
    """exp(Omega H) with H symmetric is symplectic."""
    H = rng.normal(size=(2 * n, 2 * n)) * scale
    return expm(symplectic_form(n) @ (H + H.T) / 2)


def random_state(n, rng):
    nu = 1.0 + rng.exponential(size=n)
    S = random_symplectic(n, rng)
    return S @ np.diag(np.repeat(nu, 2)) @ S.T, np.sort(nu)[::-1]


def brute_force_nu(sigma):
    n = sigma.shape[0] // 2
    vals = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ sigma))
    return np.sort(vals)[::-1][::2]


def two_mode_squeezed(r, nu=1.0):
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    Z = np.diag([1.0, -1.0])
    return nu * np.block([[c * np.eye(2), s * Z], [s * Z, c * np.eye(2)]])


class TestSymplecticForm:
    def test_single_mode(self):
        assert np.array_equal(symplectic_form(1), [[0, 1], [-1, 0]])

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_identities(self, n):
        om = symplectic_form(n)
        assert np.allclose(om @ om, -np.eye(2 * n))
        assert np.allclose(om.T @ om, np.eye(2 * n))
        assert np.array_equal(om.T, -om)

    @pytest.mark.parametrize("n", [0, -1, 1.5])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(InvalidDimensionError):
            symplectic_form(n)


class TestSymplecticEigenvalues:
    def test_vacuum(self):
        assert np.allclose(symplectic_eigenvalues(np.eye(6)), 1.0)

    def test_williamson_form_single_mode(self):
        assert np.allclose(symplectic_eigenvalues(3 * np.eye(2)), [3.0])

    def test_matches_dense_eigensolver(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            sigma, nu = random_state(2, rng)
            got = symplectic_eigenvalues(sigma)
            assert np.allclose(got, brute_force_nu(sigma), atol=1e-10)
            assert np.allclose(got, nu, atol=1e-10)

    def test_descending_and_stacked(self):
        rng = np.random.default_rng(1)
        stack = np.array([random_state(3, rng)[0] for _ in range(4)])
        vals = symplectic_eigenvalues(stack)
        assert vals.shape == (4, 3)
        assert np.all(np.diff(vals, axis=-1) <= 0)
        for s, v in zip(stack, vals):
            assert np.allclose(v, brute_force_nu(s), atol=1e-10)

    def test_rejects_asymmetric(self):
        bad = np.eye(2)
        bad[0, 1] = 0.1
        with pytest.raises(InvalidStateError):
            symplectic_eigenvalues(bad)

    def test_rejects_odd_dimension(self):
        with pytest.raises(InvalidDimensionError):
            symplectic_eigenvalues(np.eye(3))


class TestWilliamson:
    def test_reconstruction(self):
        rng = np.random.default_rng(2)
        sigma, nu = random_state(4, rng)
        S, got = williamson(sigma)
        om = symplectic_form(4)
        assert np.allclose(S @ om @ S.T, om, atol=1e-10)
        assert np.allclose(S @ sigma @ S.T, np.diag(np.repeat(got, 2)), atol=1e-9)
        assert np.allclose(got, nu)

    def test_rejects_indefinite(self):
        with pytest.raises(InstabilityError):
            williamson(np.diag([1.0, -1.0]))


class TestEntropy:
    def test_vacuum_is_pure(self):
        assert entropy(np.eye(4)) == 0.0

    def test_f_of_three(self):
        # f(3) = 2 log 2 - 1 log 1
        assert entropy(3 * np.eye(2)) == pytest.approx(2 * np.log(2), abs=1e-14)

    def test_f_limit_at_one(self):
        assert entropy_function(1.0) == 0.0
        assert entropy_function(1.0 + 1e-13) == pytest.approx(0.0, abs=1e-11)
        assert np.isfinite(entropy_function(1.0 + 1e-10))

    def test_rejects_unphysical(self):
        with pytest.raises(InvalidStateError):
            entropy(0.5 * np.eye(2))

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 4))
    def test_symplectic_invariance(self, seed, n):
        rng = np.random.default_rng(seed)
        sigma, _ = random_state(n, rng)
        S = random_symplectic(n, rng)
        assert entropy(S @ sigma @ S.T) == pytest.approx(entropy(sigma), abs=1e-8)
        assert entropy(sigma) >= 0

    def test_check_state(self):
        assert np.allclose(check_state(2 * np.eye(2)), [2.0])
        with pytest.raises(InvalidStateError):
            check_state(np.diag([0.5, 0.5]))


class TestReducedState:
    def test_product_blocks(self):
        a, b = 2 * np.eye(2), np.diag([3.0, 1 / 3.0])
        sigma = direct_sum(a, b)
        assert np.array_equal(reduced_state(sigma, [0]), a)
        assert np.array_equal(reduced_state(sigma, [1]), b)
        assert np.array_equal(reduced_state(sigma, [0, 1]), sigma)

    def test_correlated_upper_block(self):
        sigma = two_mode_squeezed(0.3)
        assert np.array_equal(reduced_state(sigma, [0]), sigma[:2, :2])

    def test_out_of_range(self):
        with pytest.raises(InvalidDimensionError):
            reduced_state(np.eye(4), [2])
        with pytest.raises(InvalidDimensionError):
            reduced_state(np.eye(4), [])


class TestMutualInformation:
    def test_product_is_zero(self):
        sigma = direct_sum(2 * np.eye(2), 5 * np.eye(2), np.eye(2))
        assert mutual_information(sigma, [0]) == pytest.approx(0.0, abs=1e-14)

    def test_two_mode_squeezed_matches_dense(self):
        sigma = two_mode_squeezed(0.4, nu=1.5)

        def s_dense(m):
            nu = brute_force_nu(m)
            return float(np.sum((nu + 1) / 2 * np.log((nu + 1) / 2) - (nu - 1) / 2 * np.log((nu - 1) / 2)))

        expected = 2 * s_dense(sigma[:2, :2]) - s_dense(sigma)
        got = mutual_information(sigma, [0], [1])
        assert got > 0
        assert got == pytest.approx(expected, abs=1e-10)

    def test_symmetric(self):
        rng = np.random.default_rng(3)
        sigma, _ = random_state(3, rng)
        assert mutual_information(sigma, [0], [1, 2]) == pytest.approx(mutual_information(sigma, [1, 2], [0]), abs=1e-12)

    def test_overlap_rejected(self):
        with pytest.raises(InvalidDimensionError):
            mutual_information(np.eye(4), [0], [0, 1])

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_nonnegative_and_araki_lieb(self, seed):
        rng = np.random.default_rng(seed)
        sigma, _ = random_state(3, rng)
        assert mutual_information(sigma, [0]) >= -1e-8
        sa, sb, sab = entropy(sigma[:2, :2]), entropy(reduced_state(sigma, [1, 2])), entropy(sigma)
        assert abs(sa - sb) <= sab + 1e-8


class TestEnergy:
    def test_vacuum_single_mode(self):
        assert mean_energy(QuadraticHamiltonian(2 * np.eye(2)), np.eye(2)) == pytest.approx(2.0)

    def test_thermal(self):
        nu = 1.7
        assert mean_energy(0.5 * 3.0 * np.eye(2), nu * np.eye(2)) == pytest.approx(1.5 * nu)

    def test_zero_matrix(self):
        assert mean_energy(np.zeros((4, 4)), np.eye(4)) == 0.0

    def test_asymmetric_F_uses_symmetric_part(self):
        F = np.array([[1.0, 0.4], [0.0, 1.0]])
        sigma = np.array([[2.0, 0.3], [0.3, 1.0]])
        assert mean_energy(F, sigma) == pytest.approx(mean_energy((F + F.T) / 2, sigma))

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidDimensionError):
            mean_energy(np.eye(2), np.eye(4))


class TestThermal:
    def test_fig1_detector_scale(self):
        # omega = 3 pi, T = 3: nu = (e^pi + 1)/(e^pi - 1)
        expected = (np.exp(np.pi) + 1) / (np.exp(np.pi) - 1)
        assert thermal_nu(3 * np.pi, 3.0) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(1.0903314107, abs=1e-9)

    def test_photon_number(self):
        w, T = 2.0, 1.3
        nu = thermal_nu(w, T)
        assert (nu - 1) / 2 == pytest.approx(1 / np.expm1(w / T))

    def test_zero_temperature_is_ground_state(self):
        F = np.diag([2.0, 2.0, 1.0, 1.0])
        F[0, 2] = F[2, 0] = 0.3
        sigma = thermal_state(F, 0.0)
        assert np.allclose(symplectic_eigenvalues(sigma), 1.0)

    def test_coupled_energy_increasing_in_T(self):
        F = np.diag([2.0, 2.0, 2.0, 2.0])
        F[0, 2] = F[2, 0] = 0.5
        energies = [mean_energy(F, thermal_state(F, T)) for T in np.linspace(0.1, 5, 12)]
        assert np.all(np.diff(energies) > 0)

    def test_rejects_unstable(self):
        F = np.diag([1.0, 1.0, 1.0, 1.0])
        F[0, 2] = F[2, 0] = 2.0
        with pytest.raises(InstabilityError):
            thermal_state(F, 1.0)


class TestNormalModes:
    def test_decoupled(self):
        S, w = normal_modes(np.diag([1.5, 1.5, 0.5, 0.5]))
        assert np.allclose(sorted(w), [1.0, 3.0])

    def test_transform_is_symplectic_and_diagonalizes(self):
        F = np.diag([2.0, 2.0, 2.0, 2.0, 2.0, 2.0])
        F[0, 2] = F[2, 0] = F[2, 4] = F[4, 2] = 0.3
        S, w = normal_modes(F)
        om = symplectic_form(3)
        assert np.max(np.abs(S.T @ om @ S - om)) < 1e-8
        assert np.allclose(S.T @ (F + F.T) @ S, np.diag(np.repeat(w, 2)), atol=1e-10)
