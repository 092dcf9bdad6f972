import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from oracles import fhat_mp, golden_mp, log_sinc_integral, sinc_abs

from reflab import errors
from reflab.filter import Filter, bernoulli_filter, box_filter, cantor_filter
from reflab.refinable import (
    RefinableEvaluator,
    estimate_rho,
    eval_fhat,
    functional_residual,
    log_fhat_integrals,
    rho_closed_form,
    scaling_sequence,
)

# frozen from oracles.fhat_mp (400 factors, 80 digits)
GOLDEN_FHAT_1 = complex(-0.029469552895265008, 0.0757960321355762)
GOLDEN_FHAT_7_5 = complex(0.01838854760362779, 0.00832048254640574)
CANTOR_FHAT_0_7 = complex(-0.05344164332088127, 0.07355611166713005)
# q = (1/3, 0) on the golden torus: alpha = (3 - lambda) / 15
THIRD_ROWS = {5: -1.0389602376866502, 10: -0.9532626128639314, 30: -1.037972507720713}
# frozen from oracles.log_sinc_integral
LOG_SINC = {20: -153.34437359853346, 50: -474.99000718374915}


@pytest.fixture(scope="module")
def golden_eval(golden):
    return RefinableEvaluator(bernoulli_filter(golden))


def test_oracles_frozen():
    assert fhat_mp(golden_mp(), [0.5, 0.5], [0, 1], 1)[0] == pytest.approx(GOLDEN_FHAT_1, abs=1e-15)
    assert log_sinc_integral(20) == pytest.approx(LOG_SINC[20], abs=1e-12)


class TestEvaluator:
    def test_tail_eps_range(self):
        with pytest.raises(errors.ValidationError):
            RefinableEvaluator(box_filter(), tail_eps=1e-3)

    def test_factor_count_grows_logarithmically(self):
        e = RefinableEvaluator(box_filter())
        assert e.n_factors(0) == e.K_min
        assert e.n_factors(2e6) - e.n_factors(1e6) == 1

    def test_golden_value(self, golden_eval):
        assert eval_fhat(golden_eval, 1.0) == pytest.approx(GOLDEN_FHAT_1, abs=1e-11)
        assert eval_fhat(golden_eval, 7.5) == pytest.approx(GOLDEN_FHAT_7_5, abs=1e-11)

    def test_cantor_value(self):
        assert eval_fhat(RefinableEvaluator(cantor_filter()), 0.7) == pytest.approx(CANTOR_FHAT_0_7, abs=1e-11)

    def test_mp_argument(self, golden_eval):
        with mpmath.workdps(50):
            v = eval_fhat(golden_eval, mpmath.mpf(1))
        assert v == pytest.approx(GOLDEN_FHAT_1, abs=1e-11)

    def test_vectorised(self, golden_eval):
        v = eval_fhat(golden_eval, np.array([1.0, 7.5]))
        assert v.shape == (2,)
        assert v[1] == pytest.approx(GOLDEN_FHAT_7_5, abs=1e-11)

    def test_box_is_sinc(self):
        y = np.linspace(-20, 20, 1001)
        assert np.max(np.abs(np.abs(eval_fhat(RefinableEvaluator(box_filter()), y)) - sinc_abs(y))) < 1e-9

    def test_fhat_zero(self, golden_eval):
        assert eval_fhat(golden_eval, 0.0) == pytest.approx(1.0)


class TestFunctionalEquation:
    @pytest.mark.parametrize("y,k", [(0.3, 1), (0.3, 5), (-2.1, 3), (11.0, 2)])
    def test_box(self, y, k):
        assert functional_residual(RefinableEvaluator(box_filter()), y, k) < 1e-10

    def test_golden(self, golden_eval):
        assert functional_residual(golden_eval, 0.77, 6) < 1e-10

    def test_cantor_zero(self):
        # A(1/4) = 0, so both sides vanish at y = 1/4
        assert functional_residual(RefinableEvaluator(cantor_filter()), 0.25, 3) < 1e-12

    def test_k_positive(self):
        with pytest.raises(errors.ValidationError):
            functional_residual(RefinableEvaluator(box_filter()), 0.3, 0)


class TestLogIntegrals:
    @pytest.mark.parametrize("method", ["scales", "direct"])
    def test_box_against_sinc_oracle(self, method):
        got = log_fhat_integrals(RefinableEvaluator(box_filter()), [20.0, 50.0], method=method, clip=1e-30)
        assert got == pytest.approx([LOG_SINC[20], LOG_SINC[50]], rel=1e-6)

    def test_methods_agree_cantor(self):
        e = RefinableEvaluator(cantor_filter())
        a = log_fhat_integrals(e, [20.0, 50.0], method="scales", clip=1e-30)
        b = log_fhat_integrals(e, [20.0, 50.0], method="direct", clip=1e-30)
        assert a == pytest.approx(b, rel=1e-5)

    def test_unknown_method(self):
        with pytest.raises(errors.ValidationError):
            log_fhat_integrals(RefinableEvaluator(box_filter()), [10.0], method="simpson")


class TestRho:
    def test_closed_form_box(self):
        assert rho_closed_form(box_filter())[0] == pytest.approx(1.0, abs=1e-12)

    def test_closed_form_cantor(self):
        assert rho_closed_form(cantor_filter())[0] == pytest.approx(math.log(2) / math.log(3), abs=1e-12)

    def test_short_grid_box(self):
        r = estimate_rho(RefinableEvaluator(box_filter()), [1e1, 1e2, 1e3, 1e4])
        assert r.rho_numeric == pytest.approx(1.0, abs=1e-3)
        assert r.extrapolation_residual < 1e-5

    def test_short_grid_cantor(self):
        r = estimate_rho(RefinableEvaluator(cantor_filter()), [1e1, 1e2, 1e3, 1e4])
        assert r.rho_numeric == pytest.approx(r.rho_closed, abs=0.05)

    def test_grid_too_small(self):
        with pytest.raises(errors.GridTooSmall):
            estimate_rho(RefinableEvaluator(box_filter()), [10, 100, 1000])

    @pytest.mark.parametrize("grid", [[10, 100, 1000, 500], [10, 20, 1000, 5000], [0.5, 5, 50, 500],
                                      [1e5, 1e6, 1e7, 1e8]])
    def test_grid_rejected(self, grid):
        with pytest.raises(errors.ValidationError):
            estimate_rho(RefinableEvaluator(box_filter()), grid)

    def test_fit_reproduces_means(self):
        r = estimate_rho(RefinableEvaluator(box_filter()), [1e1, 1e2, 1e3, 1e4])
        for L, m in zip(r.L_grid, r.raw_means):
            assert r.fit(L) == pytest.approx(m, abs=1e-5)


class TestScaling:
    def test_third_against_oracle(self, golden_eval):
        rows = scaling_sequence(golden_eval, ["1/5", "-1/15"], 30)
        for k, want in THIRD_ROWS.items():
            assert rows[k - 1].ratio == pytest.approx(want, abs=1e-9)

    def test_rational_coordinates(self, golden_eval):
        a = scaling_sequence(golden_eval, [Fraction(1, 5), Fraction(-1, 15)], 10)
        with mpmath.workdps(60):
            lam = (1 + mpmath.sqrt(5)) / 2
            b = scaling_sequence(golden_eval, (3 - lam) / 15, 10)
        assert [r.log_modulus for r in a] == pytest.approx([r.log_modulus for r in b], abs=1e-10)

    def test_zero_hit_cantor(self):
        # fhat(3^k / 4) contains the factor A(1/4) = 0
        with pytest.raises(errors.ZeroHit):
            scaling_sequence(RefinableEvaluator(cantor_filter()), Fraction(1, 4), 3)

    def test_zero_hit_golden_half(self, golden_eval):
        # q = (1/2, 0) has a period-3 orbit through a zero of the torus lift;
        # the modulus decays geometrically and drops below 1e-300 at k = 67
        rows = scaling_sequence(golden_eval, ["3/10", "-1/10"], 66)
        assert rows[-1].log_modulus > math.log(1e-300)
        with pytest.raises(errors.ZeroHit) as info:
            scaling_sequence(golden_eval, ["3/10", "-1/10"], 67)
        assert info.value.k == 67

    def test_coordinates_need_context(self):
        with pytest.raises(errors.ValidationError):
            scaling_sequence(RefinableEvaluator(box_filter()), [1, 2], 3)

    def test_k_max_positive(self, golden_eval):
        with pytest.raises(errors.ValidationError):
            scaling_sequence(golden_eval, 0.1, 0)
