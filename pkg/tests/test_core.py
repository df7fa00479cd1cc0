import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from trigfit.core import (
    ExpSum,
    FitConfig,
    GridError,
    InvalidModelError,
    SampleGrid,
    TrigRational,
    epsilon_resolution,
    eval_bary,
    eval_expsum,
    eval_expsum_time,
    fourier_coeffs,
)
from trigfit import numkernels


def poisson(x, a=0.5, c=0.0):
    return (1 - a * a) / (1 - 2 * a * np.cos(2 * np.pi * (x - c)) + a * a)


def random_expsum(seed, m=None, const=0.0):
    rng = np.random.default_rng(seed)
    m = m or int(rng.integers(1, 7))
    z = rng.uniform(0.2, 0.9, m) * np.exp(2j * np.pi * rng.uniform(0, 1, m))
    w = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return ExpSum(w, np.log(z), const)


class TestSampleGrid:
    def test_equispaced_detection(self):
        g = SampleGrid.equispaced_from_values(np.arange(8.0))
        assert g.equispaced
        x = np.arange(8) / 8.0
        x[3] += 1e-6
        assert not SampleGrid(np.sort(x), np.arange(8.0)).equispaced

    def test_validation(self):
        with pytest.raises(GridError):
            SampleGrid(np.array([0.0, 0.1, 0.2]), np.zeros(3))  # too short
        with pytest.raises(GridError):
            SampleGrid(np.array([0.0, 0.2, 0.1, 0.5]), np.zeros(4))
        with pytest.raises(GridError):
            SampleGrid(np.array([0.0, 0.2, 0.5, 1.0]), np.zeros(4))


class TestFitConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            FitConfig(tol=0.0)
        with pytest.raises(ValueError):
            FitConfig(tol=1.5)
        with pytest.raises(ValueError):
            FitConfig(max_degree=0)

    def test_rng_deterministic(self):
        cfg = FitConfig(seed=5)
        assert cfg.rng(1).integers(0, 100, 5).tolist() == cfg.rng(1).integers(0, 100, 5).tolist()


class TestTrigRationalInvariants:
    def test_rejects_complex_weights(self):
        with pytest.raises(InvalidModelError):
            TrigRational(np.array([0.0, 0.5]), np.array([1.0 + 1j, 1.0]), np.array([1.0, -1.0]))

    def test_rejects_odd_count_and_duplicates(self):
        with pytest.raises(InvalidModelError):
            TrigRational(np.array([0.0, 0.3, 0.5]), np.ones(3), np.array([1.0, 0.0, -1.0]))
        with pytest.raises(InvalidModelError):
            TrigRational(np.array([0.2, 0.2]), np.ones(2), np.array([1.0, -1.0]))

    def test_rejects_constraint_violation(self):
        with pytest.raises(InvalidModelError):
            TrigRational(np.array([0.0, 0.5]), np.array([1.0, 1.0]), np.array([1.0, -0.9]))


class TestEvalBary:
    def test_interpolation_at_nodes(self, poisson_model):
        r = poisson_model
        vals = eval_bary(r, r.nodes)
        assert np.max(np.abs(vals - (r.node_values + r.mean_offset))) == 0.0

    def test_two_node_extended_precision_oracle(self):
        r = TrigRational(np.array([0.0, 0.5]), np.array([1.0, 1.0]), np.array([1.0, -1.0]))
        import mpmath as mp

        mp.mp.dps = 40

        def cot(w):
            return mp.cos(mp.pi * w) / mp.sin(mp.pi * w)

        x = mp.mpf(1) / 10
        oracle = float(
            (cot(x) - cot(x - mp.mpf(1) / 2)) / (cot(x) + cot(x - mp.mpf(1) / 2))
        )
        assert abs(eval_bary(r, 0.1) - oracle) <= 1e-12

    def test_matches_poisson_closed_form(self, poisson_model):
        xs = np.random.default_rng(0).uniform(0, 1, 300)
        assert np.max(np.abs(eval_bary(poisson_model, xs) - (poisson(xs) - 1))) <= 1e-10

    def test_periodic_wrap_exact(self, poisson_model):
        xs = np.array([0.13, 0.77]) + 3.0
        # out-of-range arguments are reduced mod 1, never an error
        assert np.array_equal(
            eval_bary(poisson_model, xs), eval_bary(poisson_model, xs % 1.0)
        )


class TestEvalExpsum:
    def test_single_term(self):
        R = ExpSum(np.array([1.0 + 0j]), np.array([-1.0 + 0j]))
        assert abs(eval_expsum(R, 2) - math.exp(-2)) <= 1e-15

    @given(st.integers(0, 2**31 - 1), st.integers(1, 40))
    def test_conjugate_symmetry(self, seed, k):
        R = random_expsum(seed)
        assert eval_expsum(R, -k) == np.conj(eval_expsum(R, k))

    def test_poisson_coefficients(self, poisson_expsum):
        assert abs(eval_expsum(poisson_expsum, 3) - 0.125) <= 1e-15
        assert eval_expsum(poisson_expsum, 0) == 0.0


class TestEvalExpsumTime:
    def test_poisson_at_zero(self, poisson_expsum):
        assert abs(eval_expsum_time(poisson_expsum, 0.0) - 2.0) <= 1e-13

    def test_empty_sum_is_constant(self):
        R = ExpSum(np.zeros(0), np.zeros(0), 0.7)
        xs = np.linspace(0, 1, 17, endpoint=False)
        assert np.array_equal(eval_expsum_time(R, xs), np.full(17, 0.7))

    @given(st.integers(0, 2**31 - 1))
    def test_periodicity(self, seed):
        R = random_expsum(seed)
        x = np.random.default_rng(seed).uniform(0, 1, 8)
        scale = 1.0 + float(np.sum(np.abs(R.weights)))
        diff = np.abs(eval_expsum_time(R, x) - eval_expsum_time(R, x + 1.0))
        assert np.max(diff) <= 1e-12 * scale

    @given(st.integers(0, 2**31 - 1))
    def test_matches_symmetric_partial_sums(self, seed):
        R = random_expsum(seed)
        n_eps = epsilon_resolution(R, 1e-12)
        k = np.arange(1, n_eps + 1)
        c = eval_expsum(R, k)
        x = np.random.default_rng(seed + 1).uniform(0, 1, 5)
        partial = R.constant_term + 2 * np.real(
            np.exp(2j * np.pi * np.outer(x, k)) @ c
        )
        assert np.max(np.abs(eval_expsum_time(R, x) - partial)) <= 1e-11 * (
            1 + np.sum(np.abs(R.weights))
        )

    def test_reality(self):
        # real by construction; spot-check the closed form stays real-typed
        R = random_expsum(123)
        vals = eval_expsum_time(R, np.random.default_rng(2).uniform(0, 1, 1000))
        assert vals.dtype == np.float64


class TestExpSumInvariants:
    def test_rejects_nondecaying(self):
        with pytest.raises(InvalidModelError):
            ExpSum(np.array([1.0 + 0j]), np.array([0.0 + 0j]))

    def test_rejects_zero_weights(self):
        with pytest.raises(InvalidModelError):
            ExpSum(np.array([0.0 + 0j]), np.array([-1.0 + 0j]))

    def test_rejects_coincident_bases(self):
        with pytest.raises(InvalidModelError):
            ExpSum(
                np.array([1.0, 1.0 + 0j]),
                np.log(np.array([0.5, 0.5 + 1e-16])),
            )


class TestFourierCoeffs:
    def test_cosine_mode(self):
        n = 33
        x = np.arange(n) / n
        c = fourier_coeffs(SampleGrid(x, np.cos(2 * np.pi * x)))
        assert abs(c[1] - 0.5) <= 1e-13
        mask = np.ones(c.size, bool)
        mask[1] = False
        assert np.max(np.abs(c[mask])) <= 1e-13

    def test_constant(self):
        c = fourier_coeffs(SampleGrid.equispaced_from_values(np.ones(9)))
        assert abs(c[0] - 1.0) <= 1e-13
        assert np.max(np.abs(c[1:])) <= 1e-13

    @pytest.mark.parametrize("big_n", [16, 128])
    def test_poisson_aliasing_bound(self, big_n):
        n = 2 * big_n + 1
        x = np.arange(n) / n
        c = fourier_coeffs(SampleGrid(x, poisson(x)))
        k = np.arange(big_n + 1)
        # geometric-tail aliasing bound plus a roundoff floor
        bound = 2 * 0.5**big_n + 1e-13
        assert np.max(np.abs(c - 0.5**k)) <= bound

    def test_requires_equispaced_odd(self):
        x = np.sort(np.random.default_rng(3).uniform(0, 1, 16))
        with pytest.raises(GridError):
            fourier_coeffs(SampleGrid(x, np.zeros(16)))
        with pytest.raises(GridError):
            fourier_coeffs(SampleGrid.equispaced_from_values(np.zeros(16)))

    def test_round_trip_inverts(self):
        rng = np.random.default_rng(9)
        n = 21
        y = rng.standard_normal(n)
        c = fourier_coeffs(SampleGrid.equispaced_from_values(y))
        full = np.concatenate([c, np.conj(c[1:][::-1])])
        back = numkernels.idft(full).real
        assert np.max(np.abs(back - y)) <= 1e-12 * np.max(np.abs(y))


class TestEpsilonResolution:
    def test_geometric_crossing_matches_exact_arithmetic(self, poisson_expsum):
        eps = 2.0**-10
        got = epsilon_resolution(poisson_expsum, eps)
        # exact-arithmetic oracle: the tail of the geometric series is
        # 2 * sum_{k>N} 2^-k = 2^(1-N), which first crosses 2^-10 at N = 11
        from fractions import Fraction

        brute = next(
            n for n in range(100) if Fraction(2) ** (1 - n) <= Fraction(1, 2**10)
        )
        assert brute == 11
        assert got == 11

    def test_whole_tail_below_eps(self):
        R = ExpSum(np.array([1e-8 + 0j]), np.array([np.log(0.5) + 0j]))
        assert epsilon_resolution(R, 1e-3) == 0

    def test_two_term_brute_force(self):
        R = ExpSum(
            np.array([0.7, -0.4 + 0.2j]),
            np.log(np.array([0.8 * np.exp(0.5j), 0.55 * np.exp(-1.0j)])),
        )
        eps = 1e-8
        got = epsilon_resolution(R, eps)
        vals = [abs(eval_expsum(R, k)) for k in range(1, 10**4)]
        brute = next(n for n in range(9000) if 2 * math.fsum(vals[n:]) <= eps)
        # closed form bounds the true tail, so it can only overshoot slightly
        assert brute <= got <= brute + 5
        assert 2 * math.fsum(vals[got:]) <= eps
