"""Absolutely continuous curves eta(t) = eta(a) + int_a^t gamma, gamma in L^p."""
from __future__ import annotations

import bisect
import math
import threading
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (DiscontinuousJunction, DomainViolation, InvalidParameter,
                     NonRecoverableWarning, OutOfDomain)
from .lebesgue import (FiberLinearMap, LpElement, as_curve, glue, inv, pushforward_fiberlinear,
                       reparam_affine, split)
from .measurable import (EUCLIDEAN, Interval, PiecewiseCurve, Seminorm, ae_equal, as_interval,
                         zero_curve)
from .quadrature import DEFAULT_QUAD, QuadratureConfig


def weak_integral(gamma: PiecewiseCurve, s: float, t: float,
                  cfg: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    """Integral of gamma from s to t, summed over the pieces met by [s, t]."""
    gamma = as_curve(gamma)
    if s > t:
        return -weak_integral(gamma, t, s, cfg)
    a, b = gamma.domain
    if s < a or t > b:
        raise OutOfDomain(f"[{s}, {t}] is not inside [{a}, {b}]")
    total = np.zeros(gamma.dim)
    if s == t:
        return total
    for pc in gamma.cover():
        lo, hi = max(pc.lo, s), min(pc.hi, t)
        if hi > lo:
            total = total + pc.integral(lo, hi, cfg)
    return total


class ACCurve:
    """Pair (start, derivative class) evaluated through weak integrals.

    Evaluations are memoized on a sorted grid of knots; a new time only integrates
    the gap from the nearest knot to its left.
    """

    def __init__(self, start, deriv, p=None, cfg: QuadratureConfig = DEFAULT_QUAD):
        if isinstance(deriv, LpElement):
            self.deriv = deriv if p is None or float(p) == deriv.p else LpElement(deriv.rep, p, cfg=cfg)
        else:
            self.deriv = LpElement(deriv, 1.0 if p is None else p, cfg=cfg)
        self.start = np.atleast_1d(np.asarray(start, dtype=float)).reshape(-1)
        if self.start.size != self.deriv.dim:
            raise InvalidParameter("start and derivative have different dimensions")
        self.cfg = cfg
        a = self.domain.a
        self._knots = [a]
        self._vals = [self.start.copy()]
        self._lock = threading.Lock()

    @property
    def domain(self) -> Interval:
        return self.deriv.domain

    @property
    def p(self) -> float:
        return self.deriv.p

    @property
    def dim(self) -> int:
        return self.deriv.dim

    def eval(self, t: float) -> np.ndarray:
        t = float(t)
        a, b = self.domain
        if not (a <= t <= b):
            raise OutOfDomain(f"t={t} outside [{a}, {b}]")
        with self._lock:
            i = bisect.bisect_right(self._knots, t) - 1
            k, v = self._knots[i], self._vals[i]
        if k == t:
            return v.copy()
        val = v + weak_integral(self.deriv.rep, k, t, self.cfg)
        with self._lock:
            j = bisect.bisect_left(self._knots, t)
            if j == len(self._knots) or self._knots[j] != t:
                self._knots.insert(j, t)
                self._vals.insert(j, val)
        return val.copy()

    def values(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        out = np.empty((len(ts), self.dim))
        for i in np.argsort(ts, kind="stable"):
            out[i] = self.eval(ts[i])
        return out

    __call__ = values

    def __repr__(self):
        return f"ACCurve(start={self.start.tolist()}, p={self.p}, {self.deriv.rep!r})"


def derivative_recovery(eta: ACCurve, t: float, h: float) -> np.ndarray:
    """Central difference (eta(t + h) - eta(t - h)) / 2h.

    Warns with :class:`NonRecoverableWarning` when a jump of the derivative lies
    within h of t, where only the a.e. statement applies.
    """
    a, b = eta.domain
    if not (a < t - h and t + h < b):
        raise OutOfDomain("t +- h must lie inside the domain")
    if any(abs(t - x) <= h for x in eta.deriv.rep.jump_points()):
        warnings.warn(f"t={t} is within h of a jump of the derivative", NonRecoverableWarning)
    return (eta.eval(t + h) - eta.eval(t - h)) / (2 * h)


@dataclass(frozen=True)
class C1Map:
    """C^1 map V -> R^m with its derivative ``df(x, v)`` (linear in v), row-wise on arrays."""

    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray, np.ndarray], np.ndarray]
    out_dim: int
    domain: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "f"


def pushforward_c1(fmap: C1Map, eta: ACCurve, samples: int = 257) -> ACCurve:
    """f o eta with derivative t -> df(eta(t), eta'(t))."""
    if fmap.domain is not None:
        t = np.linspace(*eta.domain, samples)
        if not np.all(fmap.domain(eta.values(t))):
            raise DomainViolation(f"curve leaves the domain of {fmap.name}")
    start = np.asarray(fmap.f(eta.start[None, :]), dtype=float).reshape(-1)
    deriv = pushforward_fiberlinear(FiberLinearMap(lambda u, v: fmap.df(u, v), fmap.out_dim),
                                    eta.values, eta.deriv.rep)
    return ACCurve(start, deriv, eta.p, eta.cfg)


def reparam_affine_ac(eta: ACCurve, sub, target) -> ACCurve:
    alpha, beta = as_interval(sub)
    c, d = as_interval(target)
    deriv = reparam_affine(eta.deriv.rep, (alpha, beta), (c, d)).scale((beta - alpha) / (d - c))
    return ACCurve(eta.eval(alpha), deriv, eta.p, eta.cfg)


def split_ac(eta: ACCurve, partition: Sequence[float]) -> list[ACCurve]:
    parts = split(eta.deriv.rep, partition)
    return [ACCurve(eta.eval(part.domain.a), part, eta.p, eta.cfg) for part in parts]


def glue_ac(parts: Sequence[ACCurve], match_tol: float | None = None) -> ACCurve:
    """Glue curves on abutting intervals; endpoint values must agree.

    The default tolerance is 1e-9 (1 + |endpoint|).
    """
    for left, right in zip(parts, parts[1:]):
        end = left.eval(left.domain.b)
        tol = 1e-9 * (1 + float(np.max(np.abs(end)))) if match_tol is None else match_tol
        if float(np.max(np.abs(end - right.start))) > tol:
            raise DiscontinuousJunction(
                f"value {end.tolist()} at t={left.domain.b} does not match {right.start.tolist()}")
    deriv = glue([part.deriv.rep for part in parts])
    return ACCurve(parts[0].start, deriv, parts[0].p, parts[0].cfg)


def uniform_seminorm(eta: ACCurve, q: Seminorm = EUCLIDEAN, samples: int = 513) -> tuple[float, float]:
    """Sampled sup of q(eta) and the bound q(eta(a)) + (b - a)^(1 - 1/p) ||eta'||_{p,q}."""
    a, b = eta.domain
    t = np.unique(np.concatenate([np.linspace(a, b, samples), eta.deriv.rep.breakpoints()]))
    sup = float(np.max(q(eta.values(t))))
    bound = float(q(eta.start)) + (b - a) ** (1 - inv(eta.p)) * eta.deriv.norm(q)
    return sup, bound


def ae_zero_by_integrals(gamma: PiecewiseCurve, tol: float = 1e-10, grid: int = 257,
                         cfg: QuadratureConfig = DEFAULT_QUAD) -> bool:
    """True iff every integral of gamma from a to a grid point vanishes (<= tol)."""
    gamma = as_curve(gamma)
    a, b = gamma.domain
    ts = np.unique(np.concatenate([np.linspace(a, b, grid), gamma.breakpoints()]))
    acc = np.zeros(gamma.dim)
    scale = 0.0
    for s, t in zip(ts, ts[1:]):
        acc = acc + weak_integral(gamma, s, t, cfg)
        scale = max(scale, float(np.max(np.abs(acc))))
        if scale > tol:
            return False
    return True


def is_ae_zero(gamma: PiecewiseCurve, tol: float = 1e-12) -> bool:
    gamma = as_curve(gamma)
    return ae_equal(gamma, zero_curve(gamma.domain, gamma.dim), tol)
