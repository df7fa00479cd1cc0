import numpy as np
import pytest

from trigfit.algebra import add_expsum, add_rfun, compress, conv, corr, mul, scale_expsum
from trigfit.calculus import AntiderivativeEvaluator
from trigfit.core import (
    ExpSum,
    FitConfig,
    InvalidModelError,
    SampleGrid,
    eval_bary,
    eval_expsum,
    eval_expsum_time,
)
from trigfit.pronyaaa import fit_pronyaaa


def rand_sum(seed, m, const=0.0, z_hi=0.8):
    rng = np.random.default_rng(seed)
    z = rng.uniform(0.3, z_hi, m) * np.exp(2j * np.pi * rng.uniform(0, 1, m))
    w = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return ExpSum(w, np.log(z), const)


def poisson_grid(a=0.5, c=0.0, n=512):
    x = np.arange(n) / n
    y = (1 - a * a) / (1 - 2 * a * np.cos(2 * np.pi * (x - c)) + a * a) - 1.0
    return SampleGrid(x, y)


class TestCompress:
    def test_minimal_sum_is_fixed_point(self):
        R = ExpSum(
            np.array([1.0, 2.0 + 0j]), np.log(np.array([0.5, 0.3 * np.exp(1j)])), 0.7
        )
        out, report = compress(R, tol=1e-12)
        assert report.converged
        assert out.n_terms == 2
        assert out.constant_term == 0.7
        drift = np.max(
            np.abs(np.sort_complex(np.exp(out.exponents)) - np.sort_complex(np.exp(R.exponents)))
        )
        assert drift <= 1e-10

    def test_negligible_term_dropped(self):
        R = ExpSum(
            np.array([1.0, 2.0 + 0j, 1e-15]),
            np.log(np.array([0.5, 0.3 * np.exp(1j), 0.77])),
        )
        out, _ = compress(R, tol=1e-10)
        assert out.n_terms == 2

    def test_soundness_post_hoc(self):
        R = rand_sum(3, 9)
        tol = 1e-11
        out, report = compress(R, tol=tol)
        assert report.converged
        rng = np.random.default_rng(0)
        ks = rng.integers(1, R.resolution(tol) + 1, size=1000)
        ref = np.asarray(R(ks))
        scale = np.max(np.abs(np.asarray(R(np.arange(1, 4 * R.n_terms + 1)))))
        assert np.max(np.abs(np.asarray(out(ks)) - ref)) <= 10 * tol * scale

    def test_empty_passthrough(self):
        R = ExpSum(np.zeros(0), np.zeros(0), 0.4)
        out, _ = compress(R)
        assert out is R


class TestAddExpsum:
    def test_identity(self):
        S = rand_sum(1, 5, const=0.4)
        Z = ExpSum(np.zeros(0), np.zeros(0), 0.0)
        out, _ = add_expsum(S, Z)
        ks = np.arange(0, 201)
        assert np.max(np.abs(np.asarray(out(ks)) - np.asarray(S(ks)))) <= 1e-12

    def test_cancellation(self):
        S = rand_sum(2, 5, const=0.3)
        out, _ = add_expsum(S, scale_expsum(S, -1.0))
        assert out.n_terms == 0
        assert out.constant_term == 0.0

    def test_random_sums_match_coefficient_arithmetic(self):
        S = rand_sum(4, 5, const=0.2)
        G = rand_sum(5, 5, const=-0.1)
        out, report = add_expsum(S, G)
        ks = np.arange(0, 201)
        ref = np.asarray(S(ks)) + np.asarray(G(ks))
        assert np.max(np.abs(np.asarray(out(ks)) - ref)) <= 1e-12 * max(1, np.max(np.abs(ref)))

    def test_degree_bound(self):
        S = rand_sum(6, 4)
        G = rand_sum(7, 3)
        out, _ = add_expsum(S, G)
        assert out.n_terms <= 7 + 2


class TestAddRfun:
    def test_pointwise_agreement(self):
        s, _ = fit_pronyaaa(poisson_grid(0.5), FitConfig(tol=1e-10))
        g, _ = fit_pronyaaa(poisson_grid(0.65, 0.3), FitConfig(tol=1e-10))
        out, report = add_rfun(s, g, FitConfig(tol=1e-9))
        xs = np.random.default_rng(1).uniform(0, 1, 200)
        ref = eval_bary(s, xs) + eval_bary(g, xs)
        assert np.max(np.abs(eval_bary(out, xs) - ref)) <= 1e-9 * max(1, np.max(np.abs(ref)))
        assert out.degree <= s.degree + g.degree + 2

    def test_self_cancellation(self):
        s, _ = fit_pronyaaa(poisson_grid(0.5), FitConfig(tol=1e-10))
        neg = __import__("trigfit").core.TrigRational(
            s.nodes, s.weights, -s.node_values, -s.mean_offset
        )
        out, _ = add_rfun(s, neg, FitConfig(tol=1e-9))
        xs = np.linspace(0, 1, 100, endpoint=False)
        assert np.max(np.abs(eval_bary(out, xs))) <= 1e-9 * s.scale


class TestConv:
    def test_nondecaying_model_rejected(self):
        with pytest.raises(InvalidModelError):
            ExpSum(np.array([1.0 + 0j]), np.array([0.0 + 0j]))  # coefficients == 1

    def test_one_term_closed_form(self):
        S = ExpSum(np.array([2.0 + 0j]), np.array([np.log(0.5) + 0j]), 0.3)
        G = ExpSum(np.array([1.5 + 0j]), np.array([np.log(0.4) + 0j]), 0.2)
        out, _ = conv(S, G)
        assert out.n_terms == 1
        assert abs(out.weights[0] - 3.0) <= 1e-10
        assert abs(np.exp(out.exponents[0]) - 0.2) <= 1e-12
        assert abs(out.constant_term - 0.06) <= 1e-15

    def test_matches_coefficient_product(self):
        S = rand_sum(8, 5, const=0.4)
        G = rand_sum(9, 5, const=-0.2)
        out, report = conv(S, G, tol=1e-11)
        assert report.converged
        ks = np.arange(0, 101)
        ref = np.asarray(S(ks)) * np.asarray(G(ks))
        assert np.max(np.abs(np.asarray(out(ks)) - ref)) <= 1e-10 * max(1, np.max(np.abs(ref)))


class TestMul:
    def test_constant_one_is_identity(self):
        S = rand_sum(10, 5, const=0.4)
        one = ExpSum(np.zeros(0), np.zeros(0), 1.0)
        out, _ = mul(S, one, tol=1e-12)
        ks = np.arange(0, 201)
        assert np.max(np.abs(np.asarray(out(ks)) - np.asarray(S(ks)))) <= 1e-11

    def test_poisson_product_vs_dense_convolution_oracle(self):
        Pa = ExpSum(np.array([1.0 + 0j]), np.array([np.log(0.5) + 0j]))
        Pb = ExpSum(np.array([1.0 + 0j]), np.array([np.log(1 / 3.0) + 0j]))
        out, _ = mul(Pa, Pb, tol=1e-11)
        big = 400
        j = np.arange(-big, big + 1)
        cb = np.where(j == 0, 0.0, (1 / 3.0) ** np.abs(j))
        oracle = np.array(
            [np.sum(np.where(k - j == 0, 0.0, 0.5 ** np.abs(k - j)) * cb) for k in range(30)]
        )
        assert np.max(np.abs(np.asarray(out(np.arange(30))) - oracle)) <= 1e-10

    def test_pole_count_bound(self):
        A = rand_sum(11, 3)
        B = rand_sum(12, 4)
        out, _ = mul(A, B, tol=1e-12)
        assert out.n_terms <= 7


class TestCorr:
    def test_parseval_at_zero_lag(self):
        s, _ = fit_pronyaaa(poisson_grid(0.5), FitConfig(tol=1e-10))
        from trigfit.transforms import ft

        S, _ = ft(s, FitConfig(tol=1e-10))
        C, _ = corr(S, S, tol=1e-11)
        got = eval_expsum_time(C, 0.0)
        # quadrature oracle for the energy integral of s^2
        import scipy.integrate

        oracle, _ = scipy.integrate.quad(
            lambda t: eval_bary(s, t) ** 2, 0.0, 1.0, limit=200
        )
        assert abs(got - oracle) <= 1e-9 * max(1.0, abs(oracle))

    def test_shifted_pulse_peaks_at_shift(self):
        delta = 0.3
        S = ExpSum(np.array([1.0 + 0j]), np.array([np.log(0.6) + 0j]))
        # same pulse shifted by delta: coefficients pick up e^{-2 pi i k delta}
        G = ExpSum(np.array([1.0 + 0j]), np.array([np.log(0.6) - 2j * np.pi * delta]))
        C, _ = corr(S, G, tol=1e-11)
        xs = np.arange(4096) / 4096
        vals = eval_expsum_time(C, xs)
        assert abs(xs[np.argmax(vals)] - delta) <= 1e-3

    def test_zero_model(self):
        S = rand_sum(13, 4)
        Z = ExpSum(np.zeros(0), np.zeros(0), 0.0)
        out, _ = corr(S, Z)
        assert out.n_terms == 0
        assert out.constant_term == 0.0


class TestAlgebraicConsistency:
    def test_random_indices_match_direct_arithmetic(self):
        S = rand_sum(14, 6, const=0.25)
        G = rand_sum(15, 4, const=-0.15)
        A, _ = add_expsum(S, G)
        C, _ = conv(S, G, tol=1e-12)
        X, _ = corr(S, G, tol=1e-12)
        ks = np.random.default_rng(5).integers(0, 200, size=100)
        refs = {
            "add": np.asarray(S(ks)) + np.asarray(G(ks)),
            "conv": np.asarray(S(ks)) * np.asarray(G(ks)),
            "corr": np.conj(np.asarray(S(ks))) * np.asarray(G(ks)),
        }
        outs = {"add": A, "conv": C, "corr": X}
        for name, model in outs.items():
            ref = refs[name]
            scale = max(1.0, np.max(np.abs(ref)))
            assert np.max(np.abs(np.asarray(model(ks)) - ref)) <= 1e-10 * scale, name
