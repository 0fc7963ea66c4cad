import numpy as np
import pytest

from lpevol import controls
from lpevol.checks import (det_hom, rule_constant, rule_homomorphism, rule_left,
                           rule_product_inverse, rule_reparam, sample_times)
from lpevol.errors import (DiscontinuousJunction, Incompatible, InconsistentCurve,
                           InvalidParameter, NumericalSingularity)
from lpevol.evolution import evolve
from lpevol.group_curve import (GroupACCurve, delta_homomorphism, glue_group, inverse,
                                left_translate, product, push_homomorphism, reparam_group,
                                split_group)
from lpevol.lebesgue import LpElement
from lpevol.lie import GL, SO3, PositiveScalars, hom_det, hom_identity, so3_hat
from lpevol.measurable import ae_equal

R = PositiveScalars()
t9 = np.linspace(0.05, 0.95, 9)


def scalar_curve(f, df):
    return GroupACCurve.from_path(R, (0, 1), lambda t: f(t).reshape(-1, 1, 1),
                                  lambda t: df(t).reshape(-1, 1, 1))


def corpus_pairs():
    """(eta, zeta) pairs in GL(2) and SO(3); evolution curves and one-parameter subgroups."""
    rng = np.random.default_rng(21)
    pairs = []
    for G in (GL(2), SO3()):
        for _ in range(3):
            A, B, C = (G.random_algebra(rng) for _ in range(3))
            gamma = controls.trig([(A.ravel(), 2.0, 0.3), (B.ravel(), 5.0, 1.0)])
            eta = evolve(G, gamma).curve
            zeta = GroupACCurve.exponential(G, C, g0=G.exp(G.random_algebra(rng)))
            pairs.append((G, eta, zeta))
        step = controls.step([0.4], [G.random_algebra(rng).ravel(), G.random_algebra(rng).ravel()])
        pairs.append((G, evolve(G, step).curve, GroupACCurve.exponential(G, G.random_algebra(rng))))
    return pairs


PAIRS = corpus_pairs()
pair_ids = [f"{G}-{i}" for i, (G, _, _) in enumerate(PAIRS)]


class TestDot:
    def test_constant(self):
        eta = GroupACCurve.constant(GL(2), np.diag([2.0, 3.0]))
        assert np.all(eta.dot()(t9) == 0)

    def test_exponential(self):
        A = np.array([[0.0, 1.0], [-2.0, 0.3]])
        eta = GroupACCurve.exponential(GL(2), A)
        mats = eta.values(t9)
        np.testing.assert_allclose(eta.dot()(t9).reshape(-1, 2, 2), mats @ A, atol=1e-14)

    def test_mat_curve_reintegrates(self):
        A = so3_hat([0.3, -0.2, 1.0])
        eta = GroupACCurve.exponential(SO3(), A)
        np.testing.assert_allclose(eta.mat_curve.values(t9).reshape(-1, 3, 3), eta.values(t9), atol=1e-12)


class TestDelta:
    def test_exponential(self):
        A = np.array([[0.1, 1.0], [-2.0, 0.3]])
        eta = GroupACCurve.exponential(GL(2), A, g0=np.array([[2.0, 1.0], [0.0, 1.0]]))
        np.testing.assert_allclose(eta.delta()(t9), np.tile(A.ravel(), (9, 1)), atol=1e-13)

    def test_constant(self):
        eta = GroupACCurve.constant(SO3(), so3_hat([0.1, 0.2, 0.3]) + np.eye(3) * 0, p=2)
        assert rule_constant(eta)

    def test_left_translation(self):
        A = so3_hat([1.0, 0.0, 0.5])
        eta = GroupACCurve.exponential(SO3(), A)
        g = SO3().exp(so3_hat([0.3, 0.3, -1]))
        assert ae_equal(left_translate(g, eta).delta().rep, eta.delta().rep, 1e-12)

    def test_inconsistent(self):
        # a curve in GL(3) labelled as SO(3): its logarithmic derivative is not skew
        A = np.diag([1.0, 0.0, 0.0])
        eta = GroupACCurve.from_path(SO3(), (0, 1), lambda t: np.exp(t)[:, None, None] * 0 + np.eye(3)
                                     + np.einsum("m,ij->mij", np.expm1(t), A),
                                     lambda t: np.einsum("m,ij->mij", np.exp(t), A))
        with pytest.raises(InconsistentCurve):
            eta.delta()


class TestGroupOps:
    def test_scalar_product(self):
        eta = scalar_curve(np.exp, np.exp)
        zeta = scalar_curve(lambda t: np.exp(t ** 2), lambda t: 2 * t * np.exp(t ** 2))
        d = product(eta, zeta).delta()(t9)[:, 0]
        np.testing.assert_allclose(d, 1 + 2 * t9, rtol=1e-13)

    def test_scalar_inverse(self):
        d = inverse(scalar_curve(np.exp, np.exp)).delta()(t9)[:, 0]
        np.testing.assert_allclose(d, -1.0, rtol=1e-13)

    def test_product_with_inverse(self):
        eta = GroupACCurve.exponential(GL(2), np.array([[0.0, 1.0], [-1.0, 0.5]]))
        one = product(eta, inverse(eta))
        np.testing.assert_allclose(one.values(t9), np.tile(np.eye(2), (9, 1, 1)), atol=1e-13)
        np.testing.assert_allclose(one.delta()(t9), 0, atol=1e-13)

    def test_singular(self):
        eta = GroupACCurve.from_path(GL(2), (0, 1), lambda t: np.einsum("m,ij->mij", t, np.eye(2)),
                                     lambda t: np.tile(np.eye(2), (len(t), 1, 1)))
        with pytest.raises(NumericalSingularity):
            inverse(eta)

    def test_group_mismatch(self):
        with pytest.raises(Incompatible):
            product(GroupACCurve.constant(GL(3)), GroupACCurve.constant(SO3()))

    @pytest.mark.parametrize("G,eta,zeta", PAIRS, ids=pair_ids)
    def test_rule_product_inverse(self, G, eta, zeta):
        assert rule_product_inverse(eta, zeta, sample_times(eta, 3)) <= 1e-6

    @pytest.mark.parametrize("G,eta,zeta", PAIRS, ids=pair_ids)
    def test_rule_constant(self, G, eta, zeta):
        assert rule_constant(eta)
        assert rule_constant(GroupACCurve.constant(G, zeta.values([0.3])[0]))

    @pytest.mark.parametrize("G,eta,zeta", PAIRS, ids=pair_ids)
    def test_rule_left(self, G, eta, zeta):
        g = zeta.values([1.0])[0]
        assert rule_left(eta, g, sample_times(eta, 3)) <= 1e-12


class TestHomomorphisms:
    def test_det_traceless(self):
        gamma = controls.trig([(np.array([1.0, 2.0, -0.5, -1.0]), 3.0, 0.0)])
        eta = evolve(GL(2), gamma).curve
        np.testing.assert_allclose(delta_homomorphism(hom_det(2), eta)(t9), 0, atol=1e-13)

    def test_identity(self):
        eta = GroupACCurve.exponential(SO3(), so3_hat([1.0, 2.0, 3.0]))
        d = delta_homomorphism(hom_identity(SO3()), eta)
        assert ae_equal(d.rep, eta.delta().rep, 1e-13)

    def test_det_diagonal(self):
        eta = GroupACCurve.exponential(GL(2), np.diag([1.0, 2.0]))
        np.testing.assert_allclose(delta_homomorphism(hom_det(2), eta)(t9), 3.0, rtol=1e-13)
        pushed = push_homomorphism(hom_det(2), eta)
        np.testing.assert_allclose(pushed.values(t9)[:, 0, 0], np.exp(3 * t9), rtol=1e-13)

    def test_mismatch(self):
        with pytest.raises(Incompatible):
            delta_homomorphism(hom_det(3), GroupACCurve.constant(GL(2)))

    @pytest.mark.parametrize("G,eta,zeta", PAIRS, ids=pair_ids)
    def test_rule_det(self, G, eta, zeta):
        ts = sample_times(eta, 3)
        assert rule_homomorphism(eta, det_hom(G), ts) <= 1e-8
        assert rule_homomorphism(zeta, det_hom(G), ts) <= 1e-8


class TestReparam:
    A = np.array([[0.0, 1.0], [-1.0, 0.2]])

    def test_identity(self):
        eta = GroupACCurve.exponential(GL(2), self.A)
        r = reparam_group(eta, (0, 1), (0, 1))
        np.testing.assert_allclose(r.delta()(t9), eta.delta()(t9), atol=1e-14)

    def test_stretch(self):
        r = reparam_group(GroupACCurve.exponential(GL(2), self.A), (0, 1), (0, 2))
        np.testing.assert_allclose(r.delta()(2 * t9), np.tile(self.A.ravel() / 2, (9, 1)), atol=1e-13)

    def test_half(self):
        r = reparam_group(GroupACCurve.exponential(GL(2), self.A), (0, 0.5), (0, 1))
        np.testing.assert_allclose(r.delta()(t9), np.tile(self.A.ravel() / 2, (9, 1)), atol=1e-13)

    def test_degenerate(self):
        with pytest.raises(InvalidParameter):
            reparam_group(GroupACCurve.exponential(GL(2), self.A), (0.2, 1.4), (0, 1))

    @pytest.mark.parametrize("G,eta,zeta", PAIRS, ids=pair_ids)
    def test_rule_reparam(self, G, eta, zeta):
        assert rule_reparam(eta, (0.25, 0.75), (0, 1), t9) <= 1e-8
        assert rule_reparam(eta, (0.0, 1.0), (0, 3), 3 * t9) <= 1e-8


class TestSplitGlue:
    def test_round_trip(self):
        eta = GroupACCurve.exponential(SO3(), so3_hat([0.0, 1.0, 1.0]))
        back = glue_group(split_group(eta, [0, 0.3, 1]))
        np.testing.assert_allclose(back.values(t9), eta.values(t9), atol=1e-15)
        assert ae_equal(back.delta().rep, eta.delta().rep, 1e-12)

    def test_eval_at_start(self):
        eta = evolve(SO3(), controls.constant(so3_hat([1.0, 0.0, 0.0]).ravel())).curve
        np.testing.assert_array_equal(eta.eval_group(0.0).matrix, np.eye(3))

    def test_mismatch(self):
        A = so3_hat([0.0, 0.0, 1.0])
        left = GroupACCurve.exponential(SO3(), A, (0, 0.5))
        right = GroupACCurve.exponential(SO3(), A, (0.5, 1))  # restarts at the identity
        with pytest.raises(DiscontinuousJunction):
            glue_group([left, right])

    def test_membership(self):
        eta = evolve(SO3(), controls.trig([(so3_hat([1, 2, 3]).ravel(), 4.0, 0.0)])).curve
        assert eta.check_membership()
        assert isinstance(eta.delta(), LpElement)
