"""Group-valued absolutely continuous curves in a matrix group.

A :class:`GroupACCurve` carries a vectorized ``path`` t -> eta(t) (shape (m, n, n))
together with the derivative class ``deriv`` of the matrix curve, flattened
row-major to n*n coordinates.  The logarithmic derivative is always computed
from ``deriv``, never by differencing the path.
"""
from __future__ import annotations

from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .ac_curve import ACCurve
from .errors import (DiscontinuousJunction, Incompatible, InconsistentCurve, InvalidParameter,
                     NumericalSingularity, OutOfDomain)
from .lebesgue import LpElement, as_curve
from .lie import GroupElement, Homomorphism, MatrixGroup
from .measurable import (ConstPiece, FunctionPiece, Interval, PiecewiseCurve, as_interval,
                         interior_samples, lift_with_time)

Path = Callable[[np.ndarray], np.ndarray]


def _mats(v: np.ndarray, n: int) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape(-1, n, n)


def _flat(M: np.ndarray) -> np.ndarray:
    return M.reshape(M.shape[0], -1)


class GroupACCurve:
    def __init__(self, group: MatrixGroup, domain, path: Path, deriv: PiecewiseCurve, p=1.0):
        self.group = group
        self.domain = as_interval(domain)
        self._path = path
        self.deriv = as_curve(deriv)
        self.p = float(p)
        n = group.n
        if self.deriv.dim != n * n:
            raise InvalidParameter(f"derivative must have {n * n} coordinates")
        if self.deriv.domain != self.domain:
            raise InvalidParameter("derivative lives on a different domain")

    @property
    def n(self) -> int:
        return self.group.n

    # ---------------------------------------------------------------- evaluation
    def values(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        a, b = self.domain
        if np.any(ts < a) or np.any(ts > b):
            raise OutOfDomain(f"times outside [{a}, {b}]")
        return np.asarray(self._path(ts), dtype=float).reshape(len(ts), self.n, self.n)

    __call__ = values

    def eval_group(self, t: float) -> GroupElement:
        return GroupElement(self.group, self.values([t])[0])

    def check_membership(self, samples: int = 65, tol: float = 1e-8) -> bool:
        ts = np.linspace(*self.domain, samples)
        return all(self.group.is_member(M, tol) for M in self.values(ts))

    @cached_property
    def mat_curve(self) -> ACCurve:
        """The matrix-valued AC curve (start, derivative)."""
        return ACCurve(self.values([self.domain.a])[0].ravel(), self.deriv, self.p)

    def dot(self) -> PiecewiseCurve:
        return self.deriv

    # ---------------------------------------------------------------- log derivative
    def delta_curve(self, check: bool = True) -> PiecewiseCurve:
        n = self.n

        def F(t, v):
            return _flat(np.linalg.solve(self.values(t), _mats(v, n)))

        out = lift_with_time(F, [self.deriv], n * n)
        if check:
            ts = interior_samples(out.cells(), 5)
            for A in _mats(out(ts), n):
                scale = max(1.0, float(np.max(np.abs(A))))
                if not self.group.is_algebra(A, 1e-7 * scale):
                    raise InconsistentCurve("logarithmic derivative leaves the Lie algebra")
        return out

    @cached_property
    def _delta(self) -> LpElement:
        return LpElement(self.delta_curve(), self.p)

    def delta(self) -> LpElement:
        return self._delta

    # ---------------------------------------------------------------- constructors
    @classmethod
    def exponential(cls, group: MatrixGroup, A, domain=(0.0, 1.0), g0=None, p=1.0) -> "GroupACCurve":
        """t -> g0 exp((t - a) A)."""
        dom = as_interval(domain)
        A = np.asarray(A, dtype=float).reshape(group.n, group.n)
        g0 = group.identity() if g0 is None else np.asarray(g0, dtype=float)

        def path(t):
            return g0[None] @ group.exp_many((np.asarray(t) - dom.a)[:, None, None] * A[None])

        deriv = PiecewiseCurve(dom, (FunctionPiece(dom.a, dom.b, lambda t: _flat(path(t) @ A[None]),
                                                   group.n ** 2),), group.n ** 2)
        return cls(group, dom, path, deriv, p)

    @classmethod
    def constant(cls, group: MatrixGroup, g=None, domain=(0.0, 1.0), p=1.0) -> "GroupACCurve":
        dom = as_interval(domain)
        g = group.identity() if g is None else np.asarray(g, dtype=float)
        n = group.n
        deriv = PiecewiseCurve(dom, (ConstPiece(dom.a, dom.b, np.zeros(n * n)),), n * n)
        return cls(group, dom, lambda t: np.broadcast_to(g, (len(t), n, n)).copy(), deriv, p)

    @classmethod
    def from_path(cls, group: MatrixGroup, domain, path: Path, dpath: Path,
                  breakpoints: Sequence[float] = (), p=1.0) -> "GroupACCurve":
        """Curve from a path and its derivative; ``dpath`` may jump at ``breakpoints``."""
        dom = as_interval(domain)
        knots = sorted({dom.a, dom.b, *(float(x) for x in breakpoints if dom.a < x < dom.b)})
        n = group.n
        pieces = tuple(FunctionPiece(l, r, lambda t: _flat(np.asarray(dpath(t), float)
                                                           .reshape(-1, n, n)), n * n)
                       for l, r in zip(knots, knots[1:]))
        return cls(group, dom, path, PiecewiseCurve(dom, pieces, n * n), p)

    @classmethod
    def from_ac(cls, group: MatrixGroup, eta: ACCurve) -> "GroupACCurve":
        n = group.n
        return cls(group, eta.domain, lambda t: eta.values(t).reshape(-1, n, n), eta.deriv.rep, eta.p)


# --------------------------------------------------------------------------- operations


def _check_pair(eta: GroupACCurve, zeta: GroupACCurve):
    if eta.group != zeta.group:
        raise Incompatible(f"{eta.group} vs {zeta.group}")
    if eta.domain != zeta.domain:
        raise Incompatible("curves live on different domains")


def product(eta: GroupACCurve, zeta: GroupACCurve) -> GroupACCurve:
    """Pointwise product; derivative by the product rule eta' zeta + eta zeta'."""
    _check_pair(eta, zeta)
    n = eta.n

    def path(t):
        return eta.values(t) @ zeta.values(t)

    def F(t, de, dz):
        return _flat(_mats(de, n) @ zeta.values(t) + eta.values(t) @ _mats(dz, n))

    deriv = lift_with_time(F, [eta.deriv, zeta.deriv], n * n)
    return GroupACCurve(eta.group, eta.domain, path, deriv, min(eta.p, zeta.p))


def _safe_inv(M: np.ndarray) -> np.ndarray:
    try:
        out = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalSingularity("singular matrix along the curve") from exc
    if not np.all(np.isfinite(out)):
        raise NumericalSingularity("singular matrix along the curve")
    return out


def inverse(eta: GroupACCurve) -> GroupACCurve:
    """Pointwise inverse; derivative -eta^{-1} eta' eta^{-1}."""
    n = eta.n
    _safe_inv(eta.values(np.linspace(*eta.domain, 17)))

    def path(t):
        return _safe_inv(eta.values(t))

    def F(t, de):
        ei = _safe_inv(eta.values(t))
        return _flat(-ei @ _mats(de, n) @ ei)

    return GroupACCurve(eta.group, eta.domain, path, lift_with_time(F, [eta.deriv], n * n), eta.p)


def left_translate(g, eta: GroupACCurve) -> GroupACCurve:
    G = np.asarray(g.matrix if isinstance(g, GroupElement) else g, dtype=float)
    n = eta.n
    deriv = lift_with_time(lambda t, de: _flat(G[None] @ _mats(de, n)), [eta.deriv], n * n)
    return GroupACCurve(eta.group, eta.domain, lambda t: G[None] @ eta.values(t), deriv, eta.p)


def push_homomorphism(f: Homomorphism, eta: GroupACCurve) -> GroupACCurve:
    """f o eta, differentiated with the tangent map of f."""
    if f.source != eta.group:
        raise Incompatible(f"{f.name} is defined on {f.source}, not {eta.group}")
    if f.tangent is None:
        raise InvalidParameter(f"{f.name} has no tangent map")
    n, m = eta.n, f.target.n

    def path(t):
        return np.stack([f.element_map(M) for M in eta.values(t)]).reshape(-1, m, m)

    def F(t, de):
        return np.stack([np.asarray(f.tangent(M, V), float).ravel()
                         for M, V in zip(eta.values(t), _mats(de, n))])

    deriv = lift_with_time(F, [eta.deriv], m * m)
    return GroupACCurve(f.target, eta.domain, path, deriv, eta.p)


def delta_homomorphism(f: Homomorphism, eta: GroupACCurve) -> LpElement:
    """L(f) applied pointwise to delta(eta)."""
    if f.source != eta.group:
        raise Incompatible(f"{f.name} is defined on {f.source}, not {eta.group}")
    n, m = eta.n, f.target.n

    def F(t, v):
        return np.stack([np.asarray(f.algebra_map(A), float).ravel() for A in _mats(v, n)])

    return LpElement(lift_with_time(F, [eta.delta().rep], m * m), eta.p)


def reparam_group(eta: GroupACCurve, sub, target) -> GroupACCurve:
    """eta o f for the increasing affine f: target -> sub."""
    alpha, beta = as_interval(sub)
    c, d = as_interval(target)
    if not (eta.domain.a <= alpha < beta <= eta.domain.b):
        raise InvalidParameter("sub-interval must lie inside the domain")
    ratio = (beta - alpha) / (d - c)
    deriv = eta.deriv.pullback(Interval(alpha, beta), Interval(c, d)).scale(ratio)

    def path(t):
        return eta.values(np.clip(alpha + (np.asarray(t) - c) * ratio, alpha, beta))

    return GroupACCurve(eta.group, Interval(c, d), path, deriv, eta.p)


def split_group(eta: GroupACCurve, partition: Sequence[float]) -> list[GroupACCurve]:
    ts = [float(x) for x in partition]
    if ts[0] != eta.domain.a or ts[-1] != eta.domain.b or any(r <= l for l, r in zip(ts, ts[1:])):
        raise InvalidParameter("partition must increase strictly from a to b")
    return [GroupACCurve(eta.group, Interval(l, r), eta._path, eta.deriv.restrict(l, r), eta.p)
            for l, r in zip(ts, ts[1:])]


def glue_group(parts: Sequence[GroupACCurve], match_tol: float = 1e-9) -> GroupACCurve:
    from .lebesgue import glue

    for left, right in zip(parts, parts[1:]):
        if left.group != right.group:
            raise Incompatible("parts live in different groups")
        g = left.values([left.domain.b])[0]
        h = right.values([right.domain.a])[0]
        if float(np.max(np.abs(g - h))) > match_tol * (1 + float(np.max(np.abs(g)))):
            raise DiscontinuousJunction(f"junction mismatch at t={left.domain.b}")
    ends = np.array([p.domain.b for p in parts])

    def path(t):
        t = np.asarray(t, dtype=float)
        idx = np.minimum(np.searchsorted(ends, t, side="left"), len(parts) - 1)
        out = np.empty((len(t), parts[0].n, parts[0].n))
        for k in np.unique(idx):
            mask = idx == k
            out[mask] = parts[k].values(t[mask])
        return out

    deriv = glue([p.deriv for p in parts])
    return GroupACCurve(parts[0].group, Interval(parts[0].domain.a, parts[-1].domain.b), path, deriv,
                        parts[0].p)
