"""L^p seminorms of piecewise curves and the space-level operations on them."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (DomainViolation, IncompatibleDomains, InvalidParameter, NotInLp,
                     Unsupported)
from .measurable import (EUCLIDEAN, ConstPiece, Interval, PiecewiseCurve, Seminorm,
                         ae_equal, as_interval, interior_samples, lift_with_time)
from .quadrature import DEFAULT_QUAD, QuadratureConfig

INF = math.inf


def exponent(p) -> float:
    """Validate an exponent in [1, inf]; accepts the strings 'inf'/'infinity'."""
    if isinstance(p, str):
        key = p.strip().lower()
        p = INF if key in ("inf", "infinity", "+inf") else float(key)
    p = float(p)
    if math.isnan(p) or p < 1:
        raise InvalidParameter(f"exponent must lie in [1, inf], got {p}")
    return p


def inv(p: float) -> float:
    """1/p with 1/inf = 0."""
    return 0.0 if math.isinf(p) else 1.0 / p


def lp_seminorm(gamma: PiecewiseCurve, q: Seminorm = EUCLIDEAN, p=1.0,
                cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    p = exponent(p)
    pieces = gamma.cover()
    if math.isinf(p):
        val = max((pc.sup(q, pc.lo, pc.hi) for pc in pieces), default=0.0)
        if not math.isfinite(val):
            raise NotInLp("essential supremum is infinite")
        return float(val)
    total = math.fsum(pc.power_integral(q, p, pc.lo, pc.hi, cfg) for pc in pieces)
    if not math.isfinite(total):
        raise NotInLp(f"curve is not in L^{p:g}")
    return total ** (1.0 / p)


class LpElement:
    """An a.e. class of a piecewise curve, certified to lie in L^p.

    Membership is checked for every seminorm in ``seminorms`` at construction;
    further seminorm values are computed lazily and cached.
    """

    def __init__(self, rep: PiecewiseCurve, p=1.0, seminorms: Sequence[Seminorm] = (EUCLIDEAN,),
                 cfg: QuadratureConfig = DEFAULT_QUAD):
        self.rep = rep
        self.p = exponent(p)
        self.cfg = cfg
        self._cache: dict[tuple[Seminorm, float], float] = {}
        self._lock = threading.Lock()
        for q in seminorms:
            self.norm(q)

    @property
    def domain(self) -> Interval:
        return self.rep.domain

    @property
    def dim(self) -> int:
        return self.rep.dim

    def norm(self, q: Seminorm = EUCLIDEAN, p=None) -> float:
        p = self.p if p is None else exponent(p)
        key = (q, p)
        if key not in self._cache:
            val = lp_seminorm(self.rep, q, p, self.cfg)
            with self._lock:
                self._cache.setdefault(key, val)
        return self._cache[key]

    def __call__(self, t):
        return self.rep(t)

    def __eq__(self, other):
        if not isinstance(other, LpElement):
            return NotImplemented
        return self.rep.domain == other.rep.domain and ae_equal(self.rep, other.rep, 1e-9)

    __hash__ = None

    def __repr__(self):
        return f"LpElement(p={self.p}, {self.rep!r})"


def as_curve(x) -> PiecewiseCurve:
    return x.rep if isinstance(x, LpElement) else x


def inclusion_check(gamma: LpElement, r, q: Seminorm = EUCLIDEAN) -> tuple[float, float]:
    """Both sides of ||g||_p <= (b - a)^(1/p - 1/r) ||g||_r for r >= p."""
    r = exponent(r)
    if r < gamma.p:
        raise InvalidParameter("inclusion needs r >= p")
    lhs = gamma.norm(q)
    rhs = gamma.domain.length ** (inv(gamma.p) - inv(r)) * gamma.norm(q, r)
    return lhs, rhs


def reparam_affine(gamma: PiecewiseCurve, sub, target) -> PiecewiseCurve:
    """gamma o f for f(t) = alpha + (t - c)/(d - c) (beta - alpha)."""
    return as_curve(gamma).pullback(as_interval(sub), as_interval(target))


def split(gamma: PiecewiseCurve, partition: Sequence[float]) -> list[PiecewiseCurve]:
    gamma = as_curve(gamma)
    ts = [float(x) for x in partition]
    a, b = gamma.domain
    if ts[0] != a or ts[-1] != b or any(r <= l for l, r in zip(ts, ts[1:])):
        raise InvalidParameter("partition must increase strictly from a to b")
    return [gamma.restrict(l, r) for l, r in zip(ts, ts[1:])]


def glue(parts: Sequence[PiecewiseCurve]) -> PiecewiseCurve:
    parts = [as_curve(p) for p in parts]
    for left, right in zip(parts, parts[1:]):
        if left.domain.b != right.domain.a:
            raise IncompatibleDomains(f"{left.domain} and {right.domain} do not abut")
        if left.dim != right.dim:
            raise IncompatibleDomains("parts have different dimensions")
    pieces = []
    exc = set()
    for part in parts:
        pieces.extend(part.cover())
        exc.update(part.exceptions)
    # interior junctions are null; the first part's default speaks for the glued curve
    dom = Interval(parts[0].domain.a, parts[-1].domain.b)
    return PiecewiseCurve(dom, tuple(pieces), parts[0].dim, parts[0].default, tuple(exc))


def subdivide(gamma: PiecewiseCurve, n: int) -> list[PiecewiseCurve]:
    """gamma_{n,k}(t) = gamma(a + (k(b - a) + t - a)/n) / n on [a, b], k = 0..n-1."""
    gamma = as_curve(gamma)
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    a, b = gamma.domain
    h = (b - a) / n
    out = []
    for k in range(n):
        lo = a + k * h
        hi = b if k == n - 1 else a + (k + 1) * h
        out.append(gamma.pullback(Interval(lo, hi), gamma.domain).scale(1.0 / n))
    return out


def subdivision_norms(gamma: PiecewiseCurve, n: int, q: Seminorm = EUCLIDEAN, p=1.0,
                      cfg: QuadratureConfig = DEFAULT_QUAD) -> list[float]:
    return [lp_seminorm(g, q, p, cfg) for g in subdivide(gamma, n)]


# --------------------------------------------------------------------------- fiber-linear maps


@dataclass(frozen=True)
class FiberLinearMap:
    """f(u, v), continuous and linear in v; ``df(u, v, du, dv)`` is its derivative.

    All callables act row-wise on stacked arrays.  ``domain`` optionally returns a
    boolean mask telling which base points u lie in the open set U.
    """

    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    out_dim: int
    df: Callable[..., np.ndarray] | None = None
    domain: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "f"


def projection(dim: int) -> FiberLinearMap:
    return FiberLinearMap(lambda u, v: v, dim, lambda u, v, du, dv: dv, name="projection")


def scalar_product() -> FiberLinearMap:
    return FiberLinearMap(lambda u, v: u * v, 1,
                          lambda u, v, du, dv: du * v + u * dv, name="product")


def exp_scaling() -> FiberLinearMap:
    """(u, v) -> exp(u) v for scalar u; nonlinear in the base point."""
    return FiberLinearMap(lambda u, v: np.exp(u) * v, 1,
                          lambda u, v, du, dv: np.exp(u) * (du * v + dv), name="exp_scaling")


def linear(A) -> FiberLinearMap:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return FiberLinearMap(lambda u, v: v @ A.T, A.shape[0],
                          lambda u, v, du, dv: dv @ A.T, name="linear")


def left_multiplication(n: int) -> FiberLinearMap:
    """(g, v) -> g v for flattened n x n matrices."""
    def f(u, v):
        return np.einsum("mij,mjk->mik", u.reshape(-1, n, n), v.reshape(-1, n, n)).reshape(-1, n * n)

    def df(u, v, du, dv):
        return f(du, v) + f(u, dv)

    return FiberLinearMap(f, n * n, df, name="left_multiplication")


def _sample_points(gamma: PiecewiseCurve, per_cell: int = 17) -> np.ndarray:
    return interior_samples(gamma.cells(), per_cell)


def pushforward_fiberlinear(fmap: FiberLinearMap, eta: Callable[[np.ndarray], np.ndarray],
                            gamma: PiecewiseCurve) -> PiecewiseCurve:
    """t -> f(eta(t), gamma(t)) for a continuous base curve ``eta``."""
    gamma = as_curve(gamma)
    if fmap.domain is not None:
        t = np.concatenate([_sample_points(gamma), [gamma.domain.a, gamma.domain.b]])
        if not np.all(fmap.domain(np.asarray(eta(t)))):
            raise DomainViolation("base curve leaves the domain of the fiber-linear map")
    return lift_with_time(lambda t, v: fmap.f(np.asarray(eta(t)), v), [gamma], fmap.out_dim)


def theta_directional_derivative(fmap: FiberLinearMap, eta, gamma: PiecewiseCurve, eta_bar,
                                 gamma_bar: PiecewiseCurve) -> PiecewiseCurve:
    """t -> df(eta(t), gamma(t), eta_bar(t), gamma_bar(t))."""
    if fmap.df is None:
        raise Unsupported(f"{fmap.name} has no registered derivative")
    gamma, gamma_bar = as_curve(gamma), as_curve(gamma_bar)
    return lift_with_time(
        lambda t, v, dv: fmap.df(np.asarray(eta(t)), v, np.asarray(eta_bar(t)), dv),
        [gamma, gamma_bar], fmap.out_dim)


def theta_fd_error(fmap: FiberLinearMap, eta, gamma: PiecewiseCurve, eta_bar,
                   gamma_bar: PiecewiseCurve, h: float, q: Seminorm = EUCLIDEAN,
                   scheme: str = "forward", cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """L^1 distance between a difference quotient of the pushforward and its derivative."""
    gamma, gamma_bar = as_curve(gamma), as_curve(gamma_bar)
    exact = theta_directional_derivative(fmap, eta, gamma, eta_bar, gamma_bar)

    def shifted(s):
        return lift_with_time(
            lambda t, v, dv: fmap.f(np.asarray(eta(t)) + s * np.asarray(eta_bar(t)), v + s * dv),
            [gamma, gamma_bar], fmap.out_dim)

    if scheme == "forward":
        hi, lo, denom = shifted(h), shifted(0.0), h
    elif scheme == "central":
        hi, lo, denom = shifted(h), shifted(-h), 2 * h
    else:
        raise InvalidParameter(f"unknown scheme {scheme!r}")
    diff = lift_with_time(lambda t, x, y, z: (x - y) / denom - z, [hi, lo, exact])
    return lp_seminorm(diff, q, 1.0, cfg)
