import math

import numpy as np
import pytest
from oracles import quasilattice_bruteforce

from reflab import errors
from reflab.algebra import ZLambdaElement, build_context
from reflab.filter import Filter, bernoulli_filter
from reflab.quasilattice import (
    AdmissibleVector,
    abs_det_vandermonde,
    brute_force_window,
    check_self_similarity,
    contains,
    diffraction_sample,
    enumerate_window,
    gap_lower_bound,
    minkowski_threshold,
    multiscale_check,
    window_stats,
)

PHI = (1 + math.sqrt(5)) / 2
UNIT_PV = ["z^2-z-1", "z^2+z-1", "z^3-2z^2-z+1", "z^3-z-1", "z^4-z^3-1"]


class TestSigma:
    def test_first_entry_zero(self):
        with pytest.raises(errors.ValidationError):
            AdmissibleVector((1.0, 1.0))

    def test_positive(self):
        with pytest.raises(errors.ValidationError):
            AdmissibleVector((0.0, 0.0))

    def test_short_form_expands_pairs(self, plastic):
        s = AdmissibleVector.for_context(plastic, [0, 2])
        assert s.sigma == (0.0, 2.0, 2.0)

    def test_pair_mismatch(self, plastic):
        with pytest.raises(errors.ValidationError):
            AdmissibleVector.for_context(plastic, [0, 1, 2])

    def test_length(self, golden):
        with pytest.raises(errors.DimensionMismatch):
            AdmissibleVector.for_context(golden, [0, 1, 1, 1])

    def test_order_and_sum(self):
        a, b = AdmissibleVector((0, 1)), AdmissibleVector((0, 2))
        assert a <= b and not b <= a
        assert (a + b).sigma == (0.0, 3.0)


class TestWindow:
    def test_golden_small(self, golden):
        w = enumerate_window(golden, [0, 1], 6)
        pos = sorted(c for v, c in w.points if v > 0)
        assert pos == [(0, 1), (1, 1), (1, 2), (1, 3), (2, 2)]
        # symmetric, plus zero
        assert len(w) == 11

    def test_golden_boundary_excluded(self, golden):
        # the conjugate of 1 is 1 itself: excluded for sigma_2 = 1, admitted for sigma_2 = 1.01
        assert sorted(v for v, _ in enumerate_window(golden, [0, 1.01], 1.5).points) == pytest.approx(
            [-1, 0, 1])
        assert (1, 0) not in enumerate_window(golden, [0, 1], 1.5).coord_set

    def test_boundary_raise(self, golden):
        with pytest.raises(errors.BoundaryAmbiguous):
            enumerate_window(golden, [0, 1], 1.5, on_boundary="raise")

    def test_sorted(self, plastic):
        w = enumerate_window(plastic, [0, 1.5], 30)
        assert np.all(np.diff(w.values) > 0)

    def test_values_match_coords(self, plastic):
        w = enumerate_window(plastic, [0, 1.5], 30)
        v = w.coords @ (plastic.lam ** np.arange(3))
        assert np.allclose(v, w.values, atol=1e-10)

    @pytest.mark.parametrize("poly,asc,sigma,L", [
        ("z^2-z-1", [-1, -1, 1], [0, 1.3], 12.0),
        ("z^3-z-1", [-1, -1, 0, 1], [0, 1.2], 6.0),
        ("z^3-2z^2-z+1", [1, -1, -2, 1], [0, 1.1, 0.9], 8.0),
        ("z^2-4z+2", [2, -4, 1], [0, 2.0], 10.0),
    ])
    def test_against_oracle(self, poly, asc, sigma, L):
        ctx = build_context(poly)
        s = AdmissibleVector.for_context(ctx, sigma).sigma
        by_root = [(complex(r), b) for r, b in zip(ctx.roots[1:], s[1:])]
        want = quasilattice_bruteforce(asc, by_root, L, box=12)
        got = enumerate_window(ctx, sigma, L).coord_set
        assert got == frozenset(want)

    def test_brute_force_helper(self, golden):
        assert brute_force_window(golden, [0, 1.3], 12.0, box=12) == enumerate_window(golden, [0, 1.3], 12.0).coord_set

    def test_contains(self, golden):
        assert contains(golden, [0, 1], (1, 3))
        assert not contains(golden, [0, 1], (1, 0))
        assert not contains(golden, [0, 1], (1, 3), L=5.0)

    def test_not_pv(self):
        with pytest.raises(errors.NotPV):
            enumerate_window(build_context("z^2-2"), [0, 1], 5)

    def test_search_box_guard(self):
        ctx = build_context("z^4-z^3-1")
        with pytest.raises(errors.WindowTooLarge):
            enumerate_window(ctx, [0, 0.01, 0.01, 0.01], 1e5)

    def test_bad_on_boundary(self, golden):
        with pytest.raises(errors.ValidationError):
            enumerate_window(golden, [0, 1], 5, on_boundary="keep")


class TestGaps:
    @pytest.mark.parametrize("L", [100.0, 1000.0])
    def test_golden_gaps(self, golden, L):
        st = window_stats(enumerate_window(golden, [0, 1], L))
        assert st.min_gap == pytest.approx(PHI - 1, abs=1e-12)
        assert st.max_gap == pytest.approx(PHI, abs=1e-12)
        assert st.min_gap >= gap_lower_bound(AdmissibleVector((0, 1)))

    def test_gap_bound_all(self, pv_contexts):
        for ctx in pv_contexts.values():
            sigma = AdmissibleVector.for_context(ctx, [0] + [1.3] * (ctx.n - 1))
            st = window_stats(enumerate_window(ctx, sigma, 40.0))
            assert st.min_gap >= gap_lower_bound(sigma)

    def test_too_few(self, golden):
        with pytest.raises(errors.TooFewPoints):
            window_stats(enumerate_window(golden, [0, 0.1], 0.5))


class TestMinkowski:
    def test_det(self, golden):
        assert abs_det_vandermonde(golden) == pytest.approx(math.sqrt(5))
        assert abs_det_vandermonde(golden) == pytest.approx(abs(np.linalg.det(golden.vandermonde)))

    @pytest.mark.parametrize("s,L_star,coords", [(1.0, math.sqrt(5), (0, 1)), (2.0, math.sqrt(5) / 2, (-1, 1)),
                                                 (100.0, math.sqrt(5) / 100, (-55, 34))])
    def test_golden(self, golden, s, L_star, coords):
        w = minkowski_threshold(golden, [0, s])
        assert w.L_star == pytest.approx(L_star)
        assert w.coords == coords
        assert 0 < w.value < w.L_star * (1 + 1e-9)

    def test_all_contexts(self, pv_contexts):
        for ctx in pv_contexts.values():
            w = minkowski_threshold(ctx, [0] + [0.7] * (ctx.n - 1))
            assert any(w.coords) and w.value < w.L_star * (1 + 1e-9)


class TestSelfSimilarity:
    @pytest.mark.parametrize("poly", UNIT_PV)
    def test_units(self, poly):
        ctx = build_context(poly)
        rep = check_self_similarity(ctx, [0] + [1.0] * (ctx.n - 1), 20.0)
        assert rep.holds, (rep.missing, rep.extra)

    def test_golden_boundary_case(self, golden):
        # sigma_2 = 1 makes the scaled bound |lambda_2| irrational; lambda must not slip in
        assert check_self_similarity(golden, [0, 1], 20.0).holds

    def test_non_unit(self):
        with pytest.raises(errors.NotUnit):
            check_self_similarity(build_context("z^2-4z+2"), [0, 1], 10.0)


class TestMultiscale:
    def test_holds_with_small_translations(self, golden):
        f = Filter(golden.lam, [golden.lam / 2] * 2, [ZLambdaElement((0, 0)), ZLambdaElement((1, 2))],
                   context=golden)
        rep = multiscale_check(golden, [0, 1], f, 30.0)
        assert rep.holds
        assert rep.xi[1] == pytest.approx(1 - (PHI - 1))

    def test_translation_outside_xi(self, golden):
        with pytest.raises(errors.TranslationOutsideXi):
            multiscale_check(golden, [0, 1], bernoulli_filter(golden), 30.0)


class TestDiffraction:
    def test_zero_frequency_counts(self, golden):
        w = enumerate_window(golden, [0, 1], 50.0)
        assert diffraction_sample(w, [0.0])[0] == pytest.approx(len(w))

    def test_peak(self, golden):
        w = enumerate_window(golden, [0, 1], 200.0)
        y = np.linspace(1.5, 2.5, 2001)
        s = diffraction_sample(w, y)
        # strongest peak on [1.5, 2.5] at lambda^3 / sqrt(5) = 1 + 2 / sqrt(5)
        assert y[np.argmax(s)] == pytest.approx(1 + 2 / math.sqrt(5), abs=1e-3)
        assert s.max() > 0.5 * len(w)
