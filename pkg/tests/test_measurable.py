import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpevol import controls
from lpevol.errors import IncompatibleDomains, InvalidInput, InvalidParameter, NotInLp
from lpevol.measurable import (EUCLIDEAN, CompactSet, ConstPiece, FunctionPiece, Interval,
                               PiecewiseCurve, Seminorm, ae_equal, from_borel_samples,
                               lift_continuous, lusin_compact_approx, lusin_exhaustion, zip_curves)

unit = (0.0, 1.0)


def step_curve(jumps, values):
    return controls.step(jumps, [[v] for v in values])


jump_sets = st.lists(st.floats(0.02, 0.98), min_size=0, max_size=5, unique=True).map(sorted).filter(
    lambda js: all(b - a > 1e-3 for a, b in zip(js, js[1:])))


@st.composite
def step_curves(draw):
    js = draw(jump_sets)
    vals = draw(st.lists(st.floats(-5, 5), min_size=len(js) + 1, max_size=len(js) + 1))
    return step_curve(js, vals)


def continuous_on(K: CompactSet, gamma: PiecewiseCurve) -> bool:
    """Every component of K sits inside one piece and avoids the exceptional points."""
    for lo, hi in K.components:
        if not any(pc.lo <= lo and hi <= pc.hi for pc in gamma.pieces):
            return False
        if any(lo <= e <= hi for e in gamma.exceptions):
            return False
    return True


class TestInterval:
    def test_rejects_degenerate(self):
        with pytest.raises(InvalidParameter):
            Interval(1.0, 1.0)

    def test_length(self):
        assert Interval(-1.0, 2.5).length == 3.5


class TestCompactApprox:
    def test_single_jump(self):
        K = lusin_compact_approx(step_curve([0.5], [0, 1]), 0.1)
        assert K.components == ((0.0, 0.45), (0.55, 1.0))
        assert math.isclose(1 - K.measure, 0.1, abs_tol=1e-15)

    def test_continuous_curve_is_kept(self):
        gamma = controls.function(lambda t: np.sin(t)[:, None], 1)
        K = lusin_compact_approx(gamma, 0.2)
        assert K.components == ((0.0, 1.0),)

    def test_exceptional_point(self):
        gamma = controls.point_indicator(0.5)
        K = lusin_compact_approx(gamma, 0.01)
        assert K.components == ((0.0, 0.495), (0.505, 1.0))
        pts = np.linspace(0, 0.495, 50)
        assert np.all(gamma(pts) == 0)

    @pytest.mark.parametrize("eps", [0.0, -1.0, 1.0, 2.0])
    def test_bad_eps(self, eps):
        with pytest.raises(InvalidParameter):
            lusin_compact_approx(step_curve([0.5], [0, 1]), eps)

    @given(step_curves(), st.floats(1e-4, 0.9))
    def test_deficit_bound(self, gamma, eps):
        K = lusin_compact_approx(gamma, eps)
        assert gamma.domain.length - K.measure <= eps * (1 + 1e-12)
        assert continuous_on(K, gamma)


class TestExhaustion:
    def test_continuous(self):
        gamma = controls.constant([1.0])
        Ks = lusin_exhaustion(gamma, 3)
        assert Ks[0].components == ((0.0, 1.0),)
        assert Ks[1].is_empty and Ks[2].is_empty

    @pytest.mark.parametrize("jumps,N", [([0.5], 2), ([1 / 3, 2 / 3], 4), ([0.1, 0.2, 0.7], 12)])
    def test_cumulative_deficits(self, jumps, N):
        gamma = step_curve(jumps, range(len(jumps) + 1))
        Ks = lusin_exhaustion(gamma, N)
        covered = 0.0
        for n, K in enumerate(Ks, 1):
            covered += K.measure
            assert 1.0 - covered <= 1.0 / n + 1e-12
            assert continuous_on(K, gamma)

    @given(step_curves(), st.integers(1, 10))
    def test_sets_are_disjoint(self, gamma, N):
        comps = sorted(c for K in lusin_exhaustion(gamma, N) for c in K.components)
        for (a, b), (c, d) in zip(comps, comps[1:]):
            assert b <= c
        covered = math.fsum(b - a for a, b in comps)
        assert 1.0 - covered <= 1.0 / N + 1e-12


class TestLift:
    def test_sum_of_steps(self):
        x = step_curve([1 / 3], [0, 1])
        y = step_curve([2 / 3], [0, 2])
        s = lift_continuous(lambda u, v: u + v, [x, y])
        assert s.breakpoints() == pytest.approx([0, 1 / 3, 2 / 3, 1])
        assert s(np.array([0.2, 0.5, 0.9]))[:, 0].tolist() == [0, 1, 3]
        assert all(isinstance(pc, ConstPiece) for pc in s.pieces)

    def test_scale(self):
        g = controls.polynomial([[0.0], [1.0]])
        d = lift_continuous(lambda u: 2 * u, [g])
        assert len(d.pieces) == 1
        t = np.linspace(0, 1, 7)
        np.testing.assert_allclose(d(t)[:, 0], 2 * t)

    def test_zip_and_project(self):
        s = controls.function(lambda t: np.sin(t)[:, None], 1)
        c = controls.function(lambda t: np.cos(t)[:, None], 1)
        z = zip_curves(s, c)
        t = np.random.default_rng(1).uniform(0, 1, 1000)
        np.testing.assert_array_equal(z(t)[:, 0], np.sin(t))
        np.testing.assert_array_equal(z(t)[:, 1], np.cos(t))

    def test_domain_mismatch(self):
        with pytest.raises(IncompatibleDomains):
            lift_continuous(lambda u, v: u + v, [controls.constant([1.0]),
                                                  controls.constant([1.0], (0, 2))])

    @given(step_curves(), step_curves())
    def test_pointwise(self, x, y):
        F = lambda u, v: np.hstack([u * v, np.exp(u) - v])  # noqa: E731
        z = lift_continuous(F, [x, y])
        t = np.random.default_rng(0).uniform(0, 1, 1000)
        np.testing.assert_allclose(z(t), F(x(t), y(t)), rtol=0, atol=1e-12)


class TestAeEqual:
    def test_default_ignored(self):
        g = step_curve([0.5], [0, 1])
        h = g.with_default([42.0])
        assert ae_equal(g, h)

    def test_shift_detected(self):
        g = controls.polynomial([[0.0], [1.0]])
        h = controls.polynomial([[1e-3], [1.0]])
        assert not ae_equal(g, h, 1e-6)

    def test_rebuild_on_compact(self):
        g = step_curve([0.5], [0, 1])
        K = lusin_compact_approx(g, 0.1)
        pieces = tuple(ConstPiece(lo, hi, g(np.array([(lo + hi) / 2]))[0]) for lo, hi in K.components)
        rebuilt = PiecewiseCurve(g.domain, pieces, 1, np.array([7.0]))
        # off K the rebuild takes its default, so compare only on K's components
        for lo, hi in K.components:
            t = np.linspace(lo, hi, 20)
            np.testing.assert_array_equal(rebuilt(t), g(t))

    @given(step_curves(), step_curves(), step_curves())
    def test_equivalence(self, x, y, z):
        assert ae_equal(x, x)
        assert ae_equal(x, y, 1e-9) == ae_equal(y, x, 1e-9)
        if ae_equal(x, y, 1e-9) and ae_equal(y, z, 1e-9):
            assert ae_equal(x, z, 2e-9)


class TestBorelSamples:
    def test_smooth_single_piece(self):
        t = np.linspace(0, 1, 101)
        g = from_borel_samples(t, t ** 2, 0.1)
        assert len(g.pieces) == 1
        np.testing.assert_allclose(g(np.array([0.505]))[0, 0], 0.505 ** 2, atol=1e-4)

    def test_sign_splits_once(self):
        t = np.linspace(0, 1, 100)
        g = from_borel_samples(t, np.sign(t - 0.5), 0.5)
        assert len(g.pieces) == 2
        assert g.pieces[0].hi == pytest.approx(0.5, abs=0.01)

    def test_nan(self):
        with pytest.raises(InvalidInput):
            from_borel_samples([0, 0.5, 1], [0, np.nan, 1], 0.1)

    def test_non_monotone(self):
        with pytest.raises(InvalidInput):
            from_borel_samples([0, 0.6, 0.5, 1], [0, 1, 2, 3], 0.1)


class TestSeminorm:
    @pytest.mark.parametrize("q", [Seminorm("abs", dim=3, index=1), EUCLIDEAN, Seminorm("max"),
                                   Seminorm("weighted", weights=(1.0, 2.0, 0.5)),
                                   Seminorm("frobenius"), Seminorm("operator")])
    @given(x=st.lists(st.floats(-10, 10), min_size=9, max_size=9),
           y=st.lists(st.floats(-10, 10), min_size=9, max_size=9),
           lam=st.floats(-10, 10))
    def test_axioms(self, q, x, y, lam):
        if q.kind in ("abs", "weighted"):
            x, y = x[:3], y[:3]
        x, y = np.array([x]), np.array([y])
        assert q(x + y)[0] <= q(x)[0] + q(y)[0] + 1e-9
        assert q(lam * x)[0] == pytest.approx(abs(lam) * q(x)[0], rel=1e-12, abs=1e-12)


def test_function_piece_requires_positive_support():
    with pytest.raises(InvalidInput):
        PiecewiseCurve(Interval(0, 1), (FunctionPiece(0.5, 0.5, lambda t: t[:, None], 1),), 1)


class TestSumPiece:
    def singular_sum(self):
        from lpevol.measurable import add
        return add(controls.power([1.0, 0.0], -1 / 3), controls.constant([0.0, 2.0]))

    def test_keeps_closed_forms(self):
        from lpevol.measurable import SumPiece
        g = self.singular_sum()
        (pc,) = g.pieces
        assert isinstance(pc, SumPiece) and pc.singular and pc.singular_exponent == pytest.approx(-1 / 3)
        np.testing.assert_allclose(pc.integral(0.0, 1.0), [1.5, 2.0], rtol=1e-15)
        # int_0^1 (t - 1/2) t^(-1/3) dt = 3/5 - 3/4
        np.testing.assert_allclose(pc.first_moment(0.0, 1.0, 0.5), [0.6 - 0.75, 0.0], atol=1e-15)

    def test_divergence_detected(self):
        from lpevol.lebesgue import lp_seminorm
        g = self.singular_sum()
        assert lp_seminorm(g, p=2) > 0
        with pytest.raises(NotInLp):
            lp_seminorm(g, p=3)

    def test_unbounded_sup_without_sampling(self):
        import warnings
        from lpevol.lebesgue import lp_seminorm
        with warnings.catch_warnings():
            warnings.simplefilter("error", RuntimeWarning)
            with pytest.raises(NotInLp):
                lp_seminorm(self.singular_sum(), p=math.inf)
        tail = self.singular_sum().pullback((0.5, 1.0), (0.0, 1.0))
        assert lp_seminorm(tail, p=math.inf) == pytest.approx(math.sqrt(2 ** (2 / 3) + 4), rel=1e-6)

    def test_pullback_moves_singularity(self):
        g = self.singular_sum().pullback((0.0, 0.5), (0.0, 1.0))
        assert g.pieces[0].singular
        tail = self.singular_sum().pullback((0.5, 1.0), (0.0, 1.0))
        assert not tail.pieces[0].singular
        t = np.array([0.25, 0.75])
        np.testing.assert_allclose(tail(t)[:, 0], (0.5 + t / 2) ** (-1 / 3))

    def test_sub_is_add_of_negative(self):
        from lpevol.measurable import sub
        x = controls.polynomial([[0.0], [1.0]])
        y = controls.power([1.0], 0.5)
        t = np.linspace(0.1, 1, 7)
        np.testing.assert_allclose(sub(x, y)(t)[:, 0], t - np.sqrt(t), atol=1e-15)
