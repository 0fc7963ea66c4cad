import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corpus import curve_corpus
from oracles import mp_norm
from lpevol import controls
from lpevol.errors import (DomainViolation, IncompatibleDomains, InvalidParameter, NotInLp,
                           Unsupported)
from lpevol.lebesgue import (FiberLinearMap, LpElement, exponent, glue, inclusion_check, linear,
                             lp_seminorm, projection, pushforward_fiberlinear, reparam_affine,
                             scalar_product, split, subdivide, subdivision_norms,
                             theta_directional_derivative, theta_fd_error)
from lpevol.measurable import Seminorm, ae_equal

ABS = Seminorm("abs", dim=1, index=0)
ident = controls.polynomial([[0.0], [1.0]])  # t -> t
one = controls.constant([1.0])


class TestExponent:
    @pytest.mark.parametrize("text", ["inf", "Infinity", float("inf")])
    def test_infinity(self, text):
        assert exponent(text) == math.inf

    @pytest.mark.parametrize("bad", [0.5, -1, float("nan")])
    def test_rejects(self, bad):
        with pytest.raises(InvalidParameter):
            exponent(bad)


class TestSeminorm:
    def test_constant_l2(self):
        assert lp_seminorm(controls.constant([1.0], (0, 2)), ABS, 2) == pytest.approx(math.sqrt(2), rel=1e-14)

    def test_power_l2(self):
        assert lp_seminorm(controls.power([1.0], -1 / 3), ABS, 2) == pytest.approx(math.sqrt(3), rel=1e-12)

    def test_power_not_l3(self):
        with pytest.raises(NotInLp):
            lp_seminorm(controls.power([1.0], -1 / 3), ABS, 3)

    def test_sup_of_sin(self):
        g = controls.function(lambda t: np.sin(t)[:, None], 1, (0, math.pi / 2))
        assert lp_seminorm(g, ABS, "inf") == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_sampled_singularity_not_in_lp(self):
        # the same singular function without the closed form: quadrature must give up
        g = controls.function(lambda t: np.abs(t - 0.5)[:, None] ** -1.0, 1)
        with pytest.raises(NotInLp):
            lp_seminorm(g, ABS, 1)

    @given(st.lists(st.floats(-3, 3).filter(lambda c: c == 0 or abs(c) > 1e-6), min_size=1, max_size=7),
           st.sampled_from([1, 2, 3, 4.5]))
    def test_polynomial_oracle(self, coeffs, p):
        g = controls.polynomial([[c] for c in coeffs])
        roots = np.polynomial.Polynomial(coeffs).trim(1e-14).roots()
        real = [r.real for r in roots if abs(r.imag) < 1e-12]
        expect = mp_norm(lambda t: sum(c * t ** k for k, c in enumerate(coeffs)), 0, 1, p, breaks=real)
        got = lp_seminorm(g, ABS, p)
        assert got == pytest.approx(expect, rel=1e-10, abs=1e-13)

    @given(st.floats(-0.9, 2.0), st.floats(0.1, 3.0), st.sampled_from([1.0, 1.5, 2.0]))
    def test_power_closed_form(self, alpha, c, p):
        g = controls.power([c], alpha)
        if alpha * p <= -1:
            with pytest.raises(NotInLp):
                lp_seminorm(g, ABS, p)
        else:
            expect = c * (1 / (alpha * p + 1)) ** (1 / p)
            assert lp_seminorm(g, ABS, p) == pytest.approx(expect, rel=1e-10)

    def test_membership_enforced(self):
        with pytest.raises(NotInLp):
            LpElement(controls.power([1.0], -0.5), 2)
        el = LpElement(controls.power([1.0], -0.5), 1.5)
        assert el.norm() == pytest.approx((1 / 0.25) ** (1 / 1.5))

    def test_norm_cache_is_stable(self):
        el = LpElement(controls.power([1.0], -1 / 3), 2)
        assert el.norm() is el.norm() or el.norm() == el.norm()
        assert el.norm(p=1) == pytest.approx(1.5)


class TestInclusion:
    def test_saturates_for_constants(self):
        lhs, rhs = inclusion_check(LpElement(controls.constant([1.0], (0, 2)), 1), 2, ABS)
        assert lhs == pytest.approx(2) and rhs == pytest.approx(2)

    def test_identity_l1_linf(self):
        lhs, rhs = inclusion_check(LpElement(ident, 1), "inf", ABS)
        assert lhs == pytest.approx(0.5) and rhs == pytest.approx(1.0)

    def test_equal_exponents(self):
        el = LpElement(controls.power([1.0], -1 / 3), 2)
        lhs, rhs = inclusion_check(el, 2)
        assert lhs == rhs

    def test_r_below_p(self):
        with pytest.raises(InvalidParameter):
            inclusion_check(LpElement(one, 2), 1)

    def test_corpus(self):
        grid = (1.0, 2.0, 4.0, math.inf)
        checked = 0
        for gamma in curve_corpus():
            for i, p in enumerate(grid):
                for r in grid[i:]:
                    try:
                        lhs, rhs = inclusion_check(LpElement(gamma, p), r)
                    except NotInLp:
                        continue
                    assert lhs <= rhs * (1 + 1e-8)
                    checked += 1
        assert checked > 300


class TestReparam:
    def test_half_interval(self):
        g = reparam_affine(ident, (0, 0.5), (0, 1))
        t = np.linspace(0, 1, 5)
        np.testing.assert_allclose(g(t)[:, 0], t / 2)
        assert lp_seminorm(g, ABS, 1) == pytest.approx(0.25)
        assert lp_seminorm(g, ABS, 1) == pytest.approx(2 * lp_seminorm(ident.restrict(0, 0.5), ABS, 1))

    def test_identity(self):
        g = controls.step([0.3], [[1.0], [2.0]])
        assert ae_equal(reparam_affine(g, (0, 1), (0, 1)), g)

    def test_jump_moves(self):
        g = controls.step([0.5], [[1.0], [2.0]])
        r = reparam_affine(g, (0.25, 1.0), (0, 1))
        assert r.jump_points() == pytest.approx([1 / 3])

    def test_degenerate(self):
        with pytest.raises(InvalidParameter):
            reparam_affine(ident, (0.5, 0.5), (0, 1))

    @given(st.floats(0, 0.45), st.floats(0.55, 1.0), st.sampled_from([1.0, 2.0, 3.0]))
    def test_norm_identity(self, alpha, beta, p):
        gamma = curve_corpus(6)[4]
        r = reparam_affine(gamma, (alpha, beta), (0, 1))
        lhs = lp_seminorm(r, p=p) ** p
        rhs = lp_seminorm(gamma.restrict(alpha, beta), p=p) ** p / (beta - alpha)
        assert lhs == pytest.approx(rhs, rel=1e-9)
        assert lp_seminorm(r, p="inf") <= lp_seminorm(gamma, p="inf") * (1 + 1e-12)


class TestLocality:
    def test_split_constant(self):
        parts = split(one, [0, 0.5, 1])
        assert [lp_seminorm(x, ABS, 1) for x in parts] == pytest.approx([0.5, 0.5])

    def test_round_trip(self):
        g = controls.step([0.2, 0.5, 0.7], [[1.0], [-1.0], [3.0], [0.5]])
        assert ae_equal(glue(split(g, [0, 0.33, 0.6, 1])), g)

    def test_gap(self):
        with pytest.raises(IncompatibleDomains):
            glue([one.restrict(0, 0.5), one.restrict(0.75, 1.0)])

    @given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=7, unique=True),
           st.sampled_from([1.0, 2.0, math.inf]))
    def test_additivity(self, cuts, p):
        cuts = sorted(cuts)
        if any(b - a < 1e-6 for a, b in zip(cuts, cuts[1:])):
            return
        gamma = curve_corpus(3)[2]
        parts = split(gamma, [0.0, *cuts, 1.0])
        norms = [lp_seminorm(x, p=p) for x in parts]
        total = lp_seminorm(gamma, p=p)
        if math.isinf(p):
            assert total == pytest.approx(max(norms), rel=1e-9)
        else:
            assert total ** p == pytest.approx(math.fsum(x ** p for x in norms), rel=1e-9)


class TestSubdivision:
    def test_constant_l1(self):
        assert subdivision_norms(one, 4, ABS, 1) == pytest.approx([0.25] * 4)

    def test_constant_l2(self):
        norms = subdivision_norms(one, 4, ABS, 2)
        assert norms == pytest.approx([0.25] * 4)
        assert max(norms) <= 4 ** -0.5

    def test_singular_l1(self):
        gamma = controls.power([1.0], -1 / 3)
        maxima = [max(subdivision_norms(gamma, n, ABS, 1)) for n in (1, 2, 4, 8, 16)]
        expect = [1.5 * n ** (-2 / 3) for n in (1, 2, 4, 8, 16)]
        assert maxima == pytest.approx(expect, rel=1e-10)
        assert all(b < a for a, b in zip(maxima, maxima[1:]))

    def test_pieces_are_rescaled(self):
        g = ident
        parts = subdivide(g, 4)
        np.testing.assert_allclose(parts[1](np.array([0.5]))[0, 0], (1 + 0.5) / 4 / 4)

    @given(st.integers(1, 12), st.sampled_from([2.0, 3.0, 4.0, math.inf]))
    def test_decay_bound(self, n, p):
        gamma = curve_corpus(3)[1]
        bound = lp_seminorm(gamma, p=p) * (n ** (1 / p - 1) if math.isfinite(p) else 1 / n)
        assert max(subdivision_norms(gamma, n, p=p)) <= bound * (1 + 1e-8)


class TestPushforward:
    def test_projection(self):
        g = controls.step([0.5], [[1.0], [2.0]])
        out = pushforward_fiberlinear(projection(1), lambda t: np.sin(t)[:, None], g)
        assert ae_equal(out, g)

    def test_product(self):
        out = pushforward_fiberlinear(scalar_product(), lambda t: t[:, None], one)
        t = np.linspace(0, 1, 9)
        np.testing.assert_allclose(out(t)[:, 0], t)

    def test_linear(self):
        out = pushforward_fiberlinear(linear([[2, 0], [0, 3]]), lambda t: t[:, None],
                                      controls.constant([1.0, 1.0]))
        np.testing.assert_allclose(out(np.array([0.3])), [[2.0, 3.0]])

    def test_domain_violation(self):
        f = FiberLinearMap(lambda u, v: v / u, 1, domain=lambda u: u[:, 0] > 0)
        with pytest.raises(DomainViolation):
            pushforward_fiberlinear(f, lambda t: (t - 0.5)[:, None], one)


class TestTheta:
    def test_product_rule(self):
        d = theta_directional_derivative(scalar_product(), lambda t: t[:, None], one,
                                         lambda t: np.ones((len(t), 1)), controls.constant([0.0]))
        np.testing.assert_allclose(d(np.linspace(0, 1, 5))[:, 0], 1.0)

    def test_linear(self):
        gbar = controls.step([0.4], [[1.0], [-1.0]])
        d = theta_directional_derivative(projection(1), lambda t: t[:, None], one,
                                         lambda t: t[:, None], gbar)
        assert ae_equal(d, gbar)

    def test_missing_derivative(self):
        f = FiberLinearMap(lambda u, v: v, 1)
        with pytest.raises(Unsupported):
            theta_directional_derivative(f, lambda t: t[:, None], one, lambda t: t[:, None], one)

    def test_forward_difference_order(self):
        eta = lambda t: t[:, None]  # noqa: E731
        bar = lambda t: np.ones((len(t), 1))  # noqa: E731
        gbar = controls.constant([1.0])
        e3 = theta_fd_error(scalar_product(), eta, one, bar, gbar, 1e-3)
        e4 = theta_fd_error(scalar_product(), eta, one, bar, gbar, 1e-4)
        assert e3 / e4 == pytest.approx(10, rel=1e-3)
