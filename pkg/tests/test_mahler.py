import math

import numpy as np
import pytest
from oracles import mahler_numpy, smyth_three_term

from reflab import errors
from reflab.filter import TrigPolynomial, box_filter, cantor_filter, growth_filter, three_term_filter, to_trig_poly
from reflab.mahler import (
    bohr_mean_log_modulus,
    boyd_lawton_sequence,
    mahler_filter,
    mahler_jensen,
    mahler_torus_mean,
    mahler_trig,
)

PHI = (1 + math.sqrt(5)) / 2
LEHMER = [1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1]
# m(1 + x + y) - ln 3, from the closed form in terms of L(chi_-3, 2)
THREE_TERM_LOG_MEAN = -0.7755463414486592


def test_oracle_three_term_frozen():
    assert smyth_three_term() == pytest.approx(THREE_TERM_LOG_MEAN, abs=1e-15)


class TestJensen:
    def test_lehmer(self):
        assert mahler_jensen(LEHMER).value == pytest.approx(1.1762808182599191, abs=1e-12)

    def test_half_one_plus_z(self):
        assert mahler_jensen([0.5, 0.5]).value == pytest.approx(0.5)

    def test_golden(self):
        assert mahler_jensen([-1, -1, 1]).value == pytest.approx(PHI, abs=1e-14)

    def test_leading_zeros_ignored(self):
        assert mahler_jensen([0, 0, -1, -1, 1, 0]).value == pytest.approx(PHI, abs=1e-14)

    def test_multiplicative(self):
        p, q = [2, -3, 1, 5], [1, 0, 4]
        pq = np.convolve(p, q)
        assert mahler_jensen(pq).value == pytest.approx(
            mahler_jensen(p).value * mahler_jensen(q).value, rel=1e-12)

    def test_matches_numpy_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            c = rng.integers(-5, 6, size=rng.integers(2, 12)).astype(float)
            c[-1] = c[-1] or 1.0
            c[0] = c[0] or 1.0
            assert mahler_jensen(c).value == pytest.approx(mahler_numpy(c), rel=1e-9)

    def test_zero_polynomial(self):
        with pytest.raises(errors.ZeroPolynomial):
            mahler_jensen([0, 0])


class TestTorus:
    def test_constant(self):
        P = TrigPolynomial([1.0, 2.0], [1.0], [[0, 0]])
        assert mahler_torus_mean(P).value == pytest.approx(1.0, abs=1e-12)

    def test_monomial(self):
        P = TrigPolynomial([1.0, 2.0], [1.0], [[1, 1]])
        assert mahler_torus_mean(P).value == pytest.approx(1.0, abs=1e-12)

    def test_univariate_matches_jensen(self):
        P = TrigPolynomial([1.0], [-1.0, -1.0, 1.0], [[0], [1], [2]])
        est = mahler_torus_mean(P, n_samples=1 << 16)
        assert est.value == pytest.approx(PHI, abs=max(5e-3, 3 * est.half_width))

    def test_three_term(self):
        P = to_trig_poly(three_term_filter())
        est = mahler_torus_mean(P, n_samples=1 << 18)
        assert math.log(est.value) == pytest.approx(THREE_TERM_LOG_MEAN, abs=2e-4)
        assert est.half_width > 0

    def test_clip_monotone(self):
        P = to_trig_poly(three_term_filter())
        vals = [mahler_torus_mean(P, n_samples=1 << 14, clip=c).value for c in (1e-2, 1e-4, 1e-8)]
        assert vals[0] >= vals[1] >= vals[2]

    def test_reproducible_seed(self):
        P = to_trig_poly(three_term_filter())
        a = mahler_torus_mean(P, n_samples=1 << 12, seed=7)
        b = mahler_torus_mean(P, n_samples=1 << 12, seed=7)
        assert a.value == b.value

    def test_few_batches_rejected(self):
        P = to_trig_poly(three_term_filter())
        with pytest.raises(errors.ValidationError):
            mahler_torus_mean(P, batches=4)


class TestBoydLawton:
    def test_two_variable_limit(self):
        P = to_trig_poly(three_term_filter())
        seq = boyd_lawton_sequence(P, [2, 8, 32, 128])
        logs = [math.log(e.value) for e in seq]
        assert abs(logs[-1] - THREE_TERM_LOG_MEAN) < abs(logs[0] - THREE_TERM_LOG_MEAN)
        assert logs[-1] == pytest.approx(THREE_TERM_LOG_MEAN, abs=1e-3)

    def test_monomial(self):
        P = TrigPolynomial([1.0, 2.0], [1.0], [[1, 0]])
        assert boyd_lawton_sequence(P, [2])[0].value == pytest.approx(1.0)

    def test_needs_two_variables(self):
        P = TrigPolynomial([1.0], [1.0, 1.0], [[0], [1]])
        with pytest.raises(errors.UnsupportedDimension):
            boyd_lawton_sequence(P, [2])


class TestBohr:
    @pytest.mark.parametrize("make", [box_filter, cantor_filter])
    def test_two_term_mean_is_minus_ln2(self, make):
        est = bohr_mean_log_modulus(make(), [100.0, 1000.0])
        assert est.value == pytest.approx(-math.log(2), abs=1e-3)

    def test_three_term_against_torus(self):
        est = bohr_mean_log_modulus(three_term_filter(), [1e3, 1e4])
        assert est.value == pytest.approx(THREE_TERM_LOG_MEAN, abs=1e-3)

    def test_history(self):
        est = bohr_mean_log_modulus(box_filter(), [10.0, 100.0, 1000.0])
        assert [h[0] for h in est.history] == [10.0, 100.0, 1000.0]

    def test_short_schedule(self):
        with pytest.raises(errors.ScheduleTooShort):
            bohr_mean_log_modulus(box_filter(), [1000.0])

    def test_final_L_floor(self):
        with pytest.raises(errors.ValidationError):
            bohr_mean_log_modulus(box_filter(), [10.0, 100.0])


class TestDispatch:
    def test_growth_is_golden(self):
        assert mahler_filter(growth_filter()).value == pytest.approx(PHI, abs=1e-12)

    def test_trig_drops_unused_variable(self):
        P = TrigPolynomial([1.0, 2.0], [-1.0, -1.0, 1.0], [[0, 0], [0, 1], [0, 2]])
        est = mahler_trig(P)
        assert est.method == "jensen_exact"
        assert est.value == pytest.approx(PHI, abs=1e-12)
