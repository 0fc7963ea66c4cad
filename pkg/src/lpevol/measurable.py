"""Lusin-measurable curves on an interval, stored as finitely many continuous pieces.

A :class:`PiecewiseCurve` is a list of closed supports inside the domain, each with
a continuous evaluator, plus a ``default`` value used off every support and at a
finite set of ``exceptions``.  Piece boundaries and exceptions form a null set, so
values there never influence seminorms or integrals.

Evaluators are vectorized: a piece maps a 1-D array of times of length ``m`` to an
array of shape ``(m, dim)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import IncompatibleDomains, InvalidInput, InvalidParameter, NotInLp
from .quadrature import DEFAULT_QUAD, QuadratureConfig, integrate_scalar, integrate_vector

ESSSUP_SAMPLES = 257


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise InvalidParameter(f"need a finite interval with a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains(self, other: "Interval") -> bool:
        return self.a <= other.a and other.b <= self.b

    def __iter__(self):
        return iter((self.a, self.b))


def as_interval(x) -> Interval:
    return x if isinstance(x, Interval) else Interval(float(x[0]), float(x[1]))


@dataclass(frozen=True)
class CompactSet:
    """Finite disjoint union of closed intervals."""

    components: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        comps = tuple((float(l), float(r)) for l, r in self.components)
        for (l, r) in comps:
            if l > r:
                raise InvalidInput("empty component")
        for (_, r0), (l1, _) in zip(comps, comps[1:]):
            if l1 < r0:
                raise InvalidInput("components must be sorted and disjoint")
        object.__setattr__(self, "components", comps)

    @property
    def measure(self) -> float:
        return math.fsum(r - l for l, r in self.components)

    def is_empty(self) -> bool:
        return not self.components

    def __contains__(self, t: float) -> bool:
        return any(l <= t <= r for l, r in self.components)


# --------------------------------------------------------------------------- seminorms

SEMINORM_KINDS = ("abs", "euclidean", "max", "weighted", "frobenius", "operator")


@dataclass(frozen=True)
class Seminorm:
    """Continuous seminorm on R^dim; matrix kinds read the vector as a square matrix."""

    kind: str = "euclidean"
    dim: int | None = None
    index: int | None = None
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in SEMINORM_KINDS:
            raise InvalidParameter(f"unknown seminorm kind {self.kind!r}")
        if self.kind == "abs" and self.index is None:
            raise InvalidParameter("abs seminorm needs a coordinate index")
        if self.kind == "weighted":
            if self.weights is None or any(w < 0 for w in self.weights):
                raise InvalidParameter("weighted seminorm needs non-negative weights")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k = self.kind
        if k == "abs":
            return np.abs(x[..., self.index])
        if k in ("euclidean", "frobenius"):
            return np.sqrt(np.sum(x * x, axis=-1))
        if k == "max":
            return np.max(np.abs(x), axis=-1)
        if k == "weighted":
            return np.abs(x) @ np.asarray(self.weights, dtype=float)
        n = math.isqrt(x.shape[-1])
        if n * n != x.shape[-1]:
            raise InvalidParameter("operator seminorm needs a square number of coordinates")
        mats = x.reshape(x.shape[:-1] + (n, n))
        return np.linalg.norm(mats, ord=2, axis=(-2, -1))


EUCLIDEAN = Seminorm("euclidean")
FROBENIUS = Seminorm("frobenius")


# --------------------------------------------------------------------------- pieces


class Piece:
    """A continuous evaluator on a closed support [lo, hi]."""

    lo: float
    hi: float
    dim: int

    def __call__(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def restrict(self, lo: float, hi: float) -> "Piece":
        raise NotImplementedError

    def pullback(self, scale: float, shift: float, lo: float, hi: float) -> "Piece":
        """Piece on [lo, hi] evaluating ``self(shift + scale * t)`` (scale > 0)."""
        raise NotImplementedError

    def map_linear(self, M: np.ndarray) -> "Piece":
        raise NotImplementedError

    @property
    def direction(self) -> np.ndarray | None:
        """Fixed vector v when the piece has the form phi(t) * v, else None."""
        return None

    @property
    def singular(self) -> bool:
        """True when the piece is unbounded at its left end (so it must never be sampled there)."""
        return False

    @property
    def singular_exponent(self) -> float | None:
        """alpha in a blow-up like (t - lo)^alpha at the left end, when the piece is singular."""
        return None

    def integral(self, lo: float, hi: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
        return integrate_vector(self, lo, hi, cfg)

    def first_moment(self, lo: float, hi: float, center: float,
                     cfg: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
        return integrate_vector(lambda t: (t - center)[:, None] * self(t), lo, hi, cfg)

    def power_integral(self, q: Seminorm, p: float, lo: float, hi: float,
                       cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
        """Integral of q(piece)^p over [lo, hi]; raises NotInLp on divergence.

        The range is split at sign changes of the coordinates, where q(piece)
        typically has a kink that adaptive quadrature misjudges.
        """
        knots = [lo, *_sign_changes(self, lo, hi), hi]
        return math.fsum(integrate_scalar(lambda t: q(self(t)) ** p, l, r, cfg)
                         for l, r in zip(knots, knots[1:]))

    def sup(self, q: Seminorm, lo: float, hi: float) -> float:
        return _sampled_sup(lambda t: q(self(t)), lo, hi)

    def value_at(self, t: float) -> np.ndarray:
        return self(np.array([t]))[0]


def _sampled_sup(g: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> float:
    """Maximum over Chebyshev points, refined by golden-section search near the best sample."""
    from scipy.optimize import minimize_scalar

    if hi <= lo:
        return float(g(np.array([lo]))[0])
    k = np.arange(ESSSUP_SAMPLES)
    x = lo + (hi - lo) * (1 - np.cos(np.pi * k / (ESSSUP_SAMPLES - 1))) / 2
    vals = np.asarray(g(x), dtype=float)
    if not np.all(np.isfinite(vals)):
        return math.inf
    i = int(np.argmax(vals))
    best = float(vals[i])
    left, right = x[max(i - 1, 0)], x[min(i + 1, len(x) - 1)]
    if right > left:
        res = minimize_scalar(lambda s: -float(g(np.array([s]))[0]), bounds=(left, right),
                              method="bounded", options={"xatol": 1e-12 * max(1.0, hi - lo)})
        if res.success:
            best = max(best, -float(res.fun))
    return best


def _sign_changes(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                  samples: int = 129) -> list[float]:
    """Roots of the coordinates of f on (lo, hi), located by sampling plus Brent's method."""
    from scipy.optimize import brentq

    if hi <= lo:
        return []
    k = np.arange(samples)
    x = lo + (hi - lo) * (1 - np.cos(np.pi * k / (samples - 1))) / 2
    with np.errstate(all="ignore"):
        vals = np.asarray(f(x), dtype=float).reshape(samples, -1)
    roots = set()
    with np.errstate(invalid="ignore"):
        scale = float(np.nanmax(np.abs(vals), initial=0.0))
    for j in range(vals.shape[1]):
        # a kink in a coordinate at rounding level cannot move the integral
        if not np.nanmax(np.abs(vals[:, j]), initial=0.0) > 1e-9 * max(scale, 1.0):
            continue
        s = np.sign(vals[:, j])
        for i in np.nonzero(s[:-1] * s[1:] < 0)[0]:
            if not (np.isfinite(vals[i, j]) and np.isfinite(vals[i + 1, j])):
                continue
            g = lambda t, j=j: float(np.asarray(f(np.array([t]))).reshape(1, -1)[0, j])  # noqa: E731
            # batched and scalar evaluation may disagree in the last bit near a root
            if g(x[i]) * g(x[i + 1]) >= 0:
                continue
            roots.add(brentq(g, x[i], x[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return sorted(r for r in roots if lo < r < hi)


class FunctionPiece(Piece):
    """Generic continuous piece given by a vectorized callable."""

    def __init__(self, lo: float, hi: float, fn: Callable[[np.ndarray], np.ndarray], dim: int):
        self.lo, self.hi, self.fn, self.dim = float(lo), float(hi), fn, int(dim)

    def __call__(self, t):
        out = np.asarray(self.fn(np.asarray(t, dtype=float)), dtype=float)
        return out.reshape(len(t), self.dim)

    def restrict(self, lo, hi):
        return FunctionPiece(lo, hi, self.fn, self.dim)

    def pullback(self, scale, shift, lo, hi):
        fn = self.fn
        return FunctionPiece(lo, hi, lambda t: fn(shift + scale * np.asarray(t)), self.dim)

    def map_linear(self, M):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        fn, d = self.fn, self.dim
        return FunctionPiece(self.lo, self.hi,
                             lambda t: np.asarray(fn(t)).reshape(len(t), d) @ M.T, M.shape[0])

    def __repr__(self):
        return f"FunctionPiece([{self.lo}, {self.hi}], dim={self.dim})"


class ScaledPiece(Piece):
    """Piece of the form phi(t) * vec with a scalar continuous phi.

    All such values commute with each other, which the evolution solver exploits.
    """

    def __init__(self, lo, hi, phi: Callable[[np.ndarray], np.ndarray], vec):
        self.lo, self.hi = float(lo), float(hi)
        self.phi = phi
        self.vec = np.atleast_1d(np.asarray(vec, dtype=float)).copy()
        self.vec.setflags(write=False)
        self.dim = self.vec.size

    @property
    def direction(self):
        return self.vec

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.asarray(self.phi(t), dtype=float).reshape(-1, 1) * self.vec[None, :]

    def _with(self, lo, hi, phi, vec):
        return ScaledPiece(lo, hi, phi, vec)

    def restrict(self, lo, hi):
        return self._with(lo, hi, self.phi, self.vec)

    def pullback(self, scale, shift, lo, hi):
        phi = self.phi
        return ScaledPiece(lo, hi, lambda t: phi(shift + scale * np.asarray(t)), self.vec)

    def map_linear(self, M):
        M = np.atleast_2d(np.asarray(M, dtype=float))
        return self._with(self.lo, self.hi, self.phi, M @ self.vec)

    def scalar_integral(self, lo, hi, cfg=DEFAULT_QUAD) -> float:
        return integrate_scalar(self.phi, lo, hi, cfg)

    def scalar_moment(self, lo, hi, center, cfg=DEFAULT_QUAD) -> float:
        phi = self.phi
        return integrate_scalar(lambda t: (t - center) * phi(t), lo, hi, cfg)

    def scalar_abs_power_integral(self, p, lo, hi, cfg=DEFAULT_QUAD) -> float:
        phi = self.phi
        knots = [lo, *_sign_changes(lambda t: np.reshape(phi(t), (-1, 1)), lo, hi), hi]
        return math.fsum(integrate_scalar(lambda t: np.abs(phi(t)) ** p, l, r, cfg)
                         for l, r in zip(knots, knots[1:]))

    def scalar_abs_sup(self, lo, hi) -> float:
        return _sampled_sup(lambda t: np.abs(self.phi(t)), lo, hi)

    def integral(self, lo, hi, cfg=DEFAULT_QUAD):
        return self.scalar_integral(lo, hi, cfg) * self.vec

    def first_moment(self, lo, hi, center, cfg=DEFAULT_QUAD):
        return self.scalar_moment(lo, hi, center, cfg) * self.vec

    def power_integral(self, q, p, lo, hi, cfg=DEFAULT_QUAD):
        qv = float(q(self.vec))
        if qv == 0.0:
            return 0.0
        return qv ** p * self.scalar_abs_power_integral(p, lo, hi, cfg)

    def sup(self, q, lo, hi):
        qv = float(q(self.vec))
        if qv == 0.0:
            return 0.0
        return qv * self.scalar_abs_sup(lo, hi)

    def __repr__(self):
        return f"{type(self).__name__}([{self.lo}, {self.hi}], vec={self.vec.tolist()})"


def _one(t):
    return np.ones_like(np.asarray(t, dtype=float))


class ConstPiece(ScaledPiece):
    def __init__(self, lo, hi, value):
        super().__init__(lo, hi, _one, value)

    def _with(self, lo, hi, phi, vec):
        return ConstPiece(lo, hi, vec)

    def pullback(self, scale, shift, lo, hi):
        return ConstPiece(lo, hi, self.vec)

    def scalar_integral(self, lo, hi, cfg=DEFAULT_QUAD):
        return hi - lo

    def scalar_moment(self, lo, hi, center, cfg=DEFAULT_QUAD):
        return ((hi - center) ** 2 - (lo - center) ** 2) / 2

    def scalar_abs_power_integral(self, p, lo, hi, cfg=DEFAULT_QUAD):
        return hi - lo

    def scalar_abs_sup(self, lo, hi):
        return 1.0


class PowerPiece(ScaledPiece):
    """vec * (t - anchor)**alpha with anchor <= lo; singular at the anchor if alpha < 0.

    All integrals and suprema use closed forms, so a singular endpoint is never sampled.
    """

    def __init__(self, lo, hi, vec, alpha: float, anchor: float | None = None):
        anchor = float(lo) if anchor is None else float(anchor)
        if anchor > lo:
            raise InvalidParameter("power piece anchor must not exceed its left endpoint")
        self.alpha, self.anchor = float(alpha), anchor
        alpha_, anchor_ = self.alpha, anchor
        super().__init__(lo, hi, lambda t: _safe_pow(np.asarray(t) - anchor_, alpha_), vec)

    @property
    def singular(self):
        return self.alpha < 0 and self.anchor == self.lo

    @property
    def singular_exponent(self):
        return self.alpha if self.singular else None

    def _with(self, lo, hi, phi, vec):
        return PowerPiece(lo, hi, vec, self.alpha, self.anchor)

    def pullback(self, scale, shift, lo, hi):
        # (shift + scale t - anchor)^alpha = scale^alpha (t - (anchor - shift)/scale)^alpha
        anchor = min((self.anchor - shift) / scale, lo)
        return PowerPiece(lo, hi, self.vec * scale ** self.alpha, self.alpha, anchor)

    def _antider(self, e: float, lo: float, hi: float) -> float:
        """Integral of (t - anchor)^e over [lo, hi]; inf when it diverges."""
        u, v = lo - self.anchor, hi - self.anchor
        if hi <= lo:
            return 0.0
        if e == -1.0:
            return math.inf if u <= 0 else math.log(v / u)
        if e < -1.0 and u <= 0:
            return math.inf
        return (v ** (e + 1) - u ** (e + 1)) / (e + 1)

    def scalar_integral(self, lo, hi, cfg=DEFAULT_QUAD):
        val = self._antider(self.alpha, lo, hi)
        if math.isinf(val):
            raise NotInLp("power control is not integrable")
        return val

    def scalar_moment(self, lo, hi, center, cfg=DEFAULT_QUAD):
        # (t - c) = (t - anchor) + (anchor - c)
        m1 = self._antider(self.alpha + 1, lo, hi)
        m0 = self.scalar_integral(lo, hi)
        return m1 + (self.anchor - center) * m0

    def scalar_abs_power_integral(self, p, lo, hi, cfg=DEFAULT_QUAD):
        return self._antider(self.alpha * p, lo, hi)

    def scalar_abs_sup(self, lo, hi):
        u, v = lo - self.anchor, hi - self.anchor
        if self.alpha < 0:
            return math.inf if u <= 0 else u ** self.alpha
        return v ** self.alpha if self.alpha > 0 else 1.0

    def __repr__(self):
        return (f"PowerPiece([{self.lo}, {self.hi}], vec={self.vec.tolist()}, "
                f"alpha={self.alpha}, anchor={self.anchor})")


def _safe_pow(x, a):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x > 0, np.abs(x) ** a, np.inf if a < 0 else (1.0 if a == 0 else 0.0))
    return out


class SumPiece(Piece):
    """Sum of pieces on a common support; integrals and moments add up part by part.

    This keeps the closed forms of symbolic parts (such as a singular power) usable
    after adding a smooth or constant term.
    """

    def __init__(self, lo, hi, parts: Sequence[Piece]):
        flat = []
        for pc in parts:
            flat.extend(pc.parts if isinstance(pc, SumPiece) else [pc])
        if not flat or len({pc.dim for pc in flat}) != 1:
            raise InvalidInput("summands must share one dimension")
        self.lo, self.hi, self.dim = float(lo), float(hi), flat[0].dim
        self.parts = tuple(pc.restrict(lo, hi) for pc in flat)

    @property
    def singular(self):
        return any(pc.singular for pc in self.parts)

    @property
    def singular_exponent(self):
        exps = [pc.singular_exponent for pc in self.parts if pc.singular]
        return min(exps) if exps else None

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return sum(pc(t) for pc in self.parts)

    def restrict(self, lo, hi):
        return SumPiece(lo, hi, self.parts)

    def pullback(self, scale, shift, lo, hi):
        return SumPiece(lo, hi, [pc.pullback(scale, shift, lo, hi) for pc in self.parts])

    def map_linear(self, M):
        return SumPiece(self.lo, self.hi, [pc.map_linear(M) for pc in self.parts])

    def integral(self, lo, hi, cfg=DEFAULT_QUAD):
        return sum(pc.integral(lo, hi, cfg) for pc in self.parts)

    def first_moment(self, lo, hi, center, cfg=DEFAULT_QUAD):
        return sum(pc.first_moment(lo, hi, center, cfg) for pc in self.parts)

    def _leading_blowup(self, q: Seminorm, lo: float) -> float | None:
        """Exponent of the most singular power parts at ``lo`` when their sum is q-nonzero."""
        powers = [pc for pc in self.parts if isinstance(pc, PowerPiece) and pc.singular and lo == pc.lo]
        if not powers:
            return None
        worst = min(pc.alpha for pc in powers)
        lead = sum(pc.vec for pc in powers if pc.alpha == worst)
        return worst if float(q(lead[None, :])[0]) > 0 else None

    def power_integral(self, q, p, lo, hi, cfg=DEFAULT_QUAD):
        alpha = self._leading_blowup(q, lo)
        if alpha is not None and alpha * p <= -1:
            raise NotInLp("sum contains a power that is not p-integrable")
        return super().power_integral(q, p, lo, hi, cfg)

    def sup(self, q, lo, hi):
        if self._leading_blowup(q, lo) is not None:
            return math.inf
        return super().sup(q, lo, hi)

    def __repr__(self):
        return f"SumPiece([{self.lo}, {self.hi}], parts={list(self.parts)})"


# --------------------------------------------------------------------------- curves


@dataclass(frozen=True, eq=False)
class PiecewiseCurve:
    domain: Interval
    pieces: tuple[Piece, ...]
    dim: int
    default: np.ndarray = None
    exceptions: tuple[float, ...] = ()
    _los: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        dom = as_interval(self.domain)
        object.__setattr__(self, "domain", dom)
        pieces = tuple(self.pieces)
        object.__setattr__(self, "pieces", pieces)
        default = np.zeros(self.dim) if self.default is None else np.asarray(self.default, float).reshape(-1)
        if default.size != self.dim:
            raise InvalidInput("default has wrong dimension")
        object.__setattr__(self, "default", default)
        object.__setattr__(self, "exceptions", tuple(sorted({float(e) for e in self.exceptions})))
        prev = dom.a
        for pc in pieces:
            if pc.dim != self.dim:
                raise InvalidInput(f"piece dim {pc.dim} != curve dim {self.dim}")
            if not (pc.lo < pc.hi):
                raise InvalidInput("piece supports must have positive length")
            if pc.lo < prev or pc.hi > dom.b:
                raise InvalidInput("pieces must be sorted, disjoint and inside the domain")
            prev = pc.hi
        object.__setattr__(self, "_los", np.array([pc.lo for pc in pieces]))

    # ---------------------------------------------------------------- evaluation
    def __call__(self, t):
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.broadcast_to(self.default, (len(t), self.dim)).copy()
        if self.pieces:
            idx = np.searchsorted(self._los, t, side="right") - 1
            for i, pc in enumerate(self.pieces):
                mask = (idx == i) & (t <= pc.hi)
                if np.any(mask):
                    out[mask] = pc(t[mask])
        if self.exceptions:
            out[np.isin(t, self.exceptions)] = self.default
        return out[0] if scalar else out

    # ---------------------------------------------------------------- structure
    @property
    def deficit(self) -> float:
        """Measure of the part of the domain covered by no support."""
        return self.domain.length - math.fsum(pc.hi - pc.lo for pc in self.pieces)

    def breakpoints(self) -> list[float]:
        pts = {self.domain.a, self.domain.b, *self.exceptions}
        for pc in self.pieces:
            pts.update((pc.lo, pc.hi))
        return sorted(pts)

    def jump_points(self) -> list[float]:
        """Points where the representation may be discontinuous.

        Interior piece boundaries, gap boundaries and exception points; domain
        endpoints only when they are exceptions.
        """
        a, b = self.domain
        pts = set(self.exceptions)
        for pc in self.pieces:
            pts.update(x for x in (pc.lo, pc.hi) if a < x < b)
        return sorted(pts)

    def gaps(self) -> list[tuple[float, float]]:
        out, prev = [], self.domain.a
        for pc in self.pieces:
            if pc.lo > prev:
                out.append((prev, pc.lo))
            prev = pc.hi
        if prev < self.domain.b:
            out.append((prev, self.domain.b))
        return out

    def cover(self) -> list[Piece]:
        """Pieces plus constant default pieces filling the gaps, sorted."""
        filled = list(self.pieces) + [ConstPiece(l, r, self.default) for l, r in self.gaps()]
        return sorted(filled, key=lambda pc: pc.lo)

    def cells(self, extra: Sequence[float] = ()) -> list[tuple[float, float]]:
        a, b = self.domain
        pts = sorted(set(self.breakpoints()) | {float(x) for x in extra if a <= x <= b})
        return [(l, r) for l, r in zip(pts, pts[1:]) if r > l]

    def piece_on(self, lo: float, hi: float) -> Piece:
        """Piece (or default filler) whose support contains [lo, hi]."""
        for pc in self.pieces:
            if pc.lo <= lo and hi <= pc.hi:
                return pc
        for l, r in self.gaps():
            if l <= lo and hi <= r:
                return ConstPiece(l, r, self.default)
        raise InvalidInput(f"[{lo}, {hi}] straddles a piece boundary")

    # ---------------------------------------------------------------- transforms
    def restrict(self, lo: float, hi: float) -> "PiecewiseCurve":
        if not (self.domain.a <= lo < hi <= self.domain.b):
            raise InvalidParameter(f"[{lo}, {hi}] is not a subinterval of {self.domain}")
        pieces = [pc.restrict(max(pc.lo, lo), min(pc.hi, hi)) for pc in self.pieces
                  if min(pc.hi, hi) > max(pc.lo, lo)]
        exc = [e for e in self.exceptions if lo <= e <= hi]
        return PiecewiseCurve(Interval(lo, hi), tuple(pieces), self.dim, self.default, tuple(exc))

    def pullback(self, sub, target) -> "PiecewiseCurve":
        """Compose with the increasing affine map f: target -> sub."""
        alpha, beta = as_interval(sub)
        c, d = as_interval(target)
        if not (self.domain.a <= alpha and beta <= self.domain.b):
            raise InvalidParameter("sub-interval must lie inside the domain")
        scale = (beta - alpha) / (d - c)
        shift = alpha - c * scale
        inv = lambda s: c + (s - alpha) / scale  # noqa: E731
        pieces = []
        for pc in self.pieces:
            lo, hi = max(pc.lo, alpha), min(pc.hi, beta)
            if hi > lo:
                nlo, nhi = max(c, inv(lo)), min(d, inv(hi))
                if lo == alpha:
                    nlo = c
                if hi == beta:
                    nhi = d
                if nhi > nlo:
                    pieces.append(pc.pullback(scale, shift, nlo, nhi))
        exc = [inv(e) for e in self.exceptions if alpha <= e <= beta]
        return PiecewiseCurve(Interval(c, d), tuple(pieces), self.dim, self.default, tuple(exc))

    def map_linear(self, M) -> "PiecewiseCurve":
        M = np.atleast_2d(np.asarray(M, dtype=float))
        if M.shape[1] != self.dim:
            raise InvalidInput("linear map has wrong input dimension")
        return PiecewiseCurve(self.domain, tuple(pc.map_linear(M) for pc in self.pieces),
                              M.shape[0], M @ self.default, self.exceptions)

    def scale(self, c: float) -> "PiecewiseCurve":
        return self.map_linear(c * np.eye(self.dim))

    def with_default(self, value) -> "PiecewiseCurve":
        return PiecewiseCurve(self.domain, self.pieces, self.dim, value, self.exceptions)

    def __repr__(self):
        return (f"PiecewiseCurve(domain=[{self.domain.a}, {self.domain.b}], dim={self.dim}, "
                f"pieces={len(self.pieces)}, exceptions={list(self.exceptions)})")


def zero_curve(domain, dim: int) -> PiecewiseCurve:
    dom = as_interval(domain)
    return PiecewiseCurve(dom, (ConstPiece(dom.a, dom.b, np.zeros(dim)),), dim)


# --------------------------------------------------------------------------- Lusin approximation


def _subtract_balls(lo: float, hi: float, centers: Sequence[float], r: float) -> list[tuple[float, float]]:
    """[lo, hi] minus the open balls (p - r, p + r)."""
    out, cur = [], lo
    for p in sorted(centers):
        left, right = p - r, p + r
        if right <= cur or left >= hi:
            continue
        if left > cur:
            out.append((cur, left))
        cur = max(cur, right)
    if cur < hi:
        out.append((cur, hi))
    return out


def lusin_compact_approx(gamma: PiecewiseCurve, eps: float) -> CompactSet:
    """Compact set of measure >= length - eps on which ``gamma`` is continuous.

    The budget left after the support gaps is split evenly among the jump points
    and excised symmetrically around each.
    """
    if not eps > 0:
        raise InvalidParameter("eps must be positive")
    if eps >= gamma.domain.length:
        raise InvalidParameter("eps must be smaller than the domain length")
    gap = gamma.deficit
    if gap > eps:
        raise InvalidParameter(f"support gaps ({gap}) already exceed eps")
    jumps = gamma.jump_points()
    r = (eps - gap) / (2 * len(jumps)) if jumps else 0.0
    comps: list[tuple[float, float]] = []
    for pc in gamma.pieces:
        comps.extend(c for c in _subtract_balls(pc.lo, pc.hi, jumps, r) if c[1] > c[0])
    return CompactSet(tuple(comps))


@dataclass
class _Hole:
    lo: float
    hi: float
    center: float | None
    coverable: bool


def lusin_exhaustion(gamma: PiecewiseCurve, n_sets: int) -> list[CompactSet]:
    """Pairwise disjoint compact sets K_1..K_N with cumulative deficit <= 1/n after n sets.

    ``gamma`` is continuous on each set.  The number of components at most doubles
    per step, so keep ``n_sets`` moderate (<= 20).  Support gaps are never covered,
    so the deficit bound needs ``gamma.deficit <= 1/n_sets``.
    """
    if n_sets < 1:
        raise InvalidParameter("need at least one set")
    a, b = gamma.domain
    jumps = gamma.jump_points()
    gaps = gamma.gaps()
    gap_measure = math.fsum(r - l for l, r in gaps)

    # first set: symmetric excision with radius small enough to keep holes separate
    target1 = 0.5 * min(1.0, gamma.domain.length)
    sep = min([q - p for p, q in zip(jumps, jumps[1:])] + [gamma.domain.length])
    r1 = min(max(target1 - gap_measure, 0.0) / (2 * len(jumps)), sep / 4) if jumps else 0.0
    comps1: list[tuple[float, float]] = []
    for pc in gamma.pieces:
        comps1.extend(c for c in _subtract_balls(pc.lo, pc.hi, jumps, r1) if c[1] > c[0])
    out = [CompactSet(tuple(comps1))]
    holes = [_Hole(l, r, None, False) for l, r in gaps]
    for p in jumps:
        lo, hi = max(a, p - r1), min(b, p + r1)
        holes.append(_Hole(lo, hi, p, True))

    for n in range(2, n_sets + 1):
        deficit = math.fsum(h.hi - h.lo for h in holes)
        coverable = [h for h in holes if h.coverable and h.hi > h.lo]
        if deficit <= 1.0 / n or not coverable:
            out.append(CompactSet())
            continue
        budget = max(0.5 / n - gap_measure, 0.0)
        w0 = budget / (3 * len(coverable))
        new_holes = [h for h in holes if not h.coverable]
        comps: list[tuple[float, float]] = []
        for h in coverable:
            w = min(w0, (h.hi - h.lo) / 4)
            if h.center is None:
                pieces = [(h.lo + w, h.hi - w)]
            else:
                p = h.center
                pieces = [(h.lo + w, p - w / 2), (p + w / 2, h.hi - w)]
                # holes touching the domain end need no sliver there
                if h.lo <= a and p <= a:
                    pieces = [(p + w / 2, h.hi - w)]
                if h.hi >= b and p >= b:
                    pieces = [(h.lo + w, p - w / 2)]
            pieces = [(l, r) for l, r in pieces if r > l]
            comps.extend(pieces)
            cur = h.lo
            for l, r in pieces:
                if l > cur:
                    c = h.center if (h.center is not None and cur <= h.center <= l) else None
                    new_holes.append(_Hole(cur, l, c, True))
                cur = r
            if h.hi > cur:
                c = h.center if (h.center is not None and cur <= h.center <= h.hi) else None
                new_holes.append(_Hole(cur, h.hi, c, True))
        holes = new_holes
        out.append(CompactSet(tuple(sorted(comps))))
    return out


# --------------------------------------------------------------------------- pointwise algebra


def _check_common_domain(curves: Sequence[PiecewiseCurve]) -> Interval:
    dom = curves[0].domain
    for c in curves[1:]:
        if c.domain != dom:
            raise IncompatibleDomains(f"{c.domain} != {dom}")
    return dom


def lift_with_time(F: Callable[..., np.ndarray], curves: Sequence[PiecewiseCurve],
                   out_dim: int | None = None) -> PiecewiseCurve:
    """Like :func:`lift_continuous` but ``F(t, *values)`` also receives the times."""
    if not curves:
        raise InvalidInput("need at least one curve")
    dom = _check_common_domain(curves)
    pts = sorted(set().union(*(c.breakpoints() for c in curves)))
    exc = sorted(set().union(*(c.exceptions for c in curves)))
    defaults = [c.default[None, :] for c in curves]
    probe_t = np.array([dom.a])
    default = np.asarray(F(probe_t, *defaults), dtype=float).reshape(1, -1)[0]
    dim = default.size if out_dim is None else out_dim
    pieces: list[Piece] = []
    for l, r in zip(pts, pts[1:]):
        if r <= l:
            continue
        srcs = []
        covered = False
        for c in curves:
            pc = _find_piece(c, l, r)
            covered |= pc is not None
            srcs.append(pc if pc is not None else ConstPiece(l, r, c.default))
        if not covered:
            continue
        pieces.append(FunctionPiece(l, r, _compose(F, srcs), dim))
    return PiecewiseCurve(dom, tuple(pieces), dim, default, tuple(exc))


def _find_piece(c: PiecewiseCurve, l: float, r: float) -> Piece | None:
    for pc in c.pieces:
        if pc.lo <= l and r <= pc.hi:
            return pc
    return None


def _compose(F, srcs):
    return lambda t: F(t, *[s(t) for s in srcs])


def lift_continuous(F: Callable[..., np.ndarray], curves: Sequence[PiecewiseCurve]) -> PiecewiseCurve:
    """Pointwise ``F(gamma_1(t), ..., gamma_k(t))`` on the common refinement of the pieces.

    ``F`` receives one ``(m, d_i)`` array per curve and returns ``(m, out_dim)``.
    Cells where every input is constant produce constant pieces.
    """
    dom = _check_common_domain(curves)
    out = lift_with_time(lambda t, *v: F(*v), curves)
    pieces = []
    for pc in out.pieces:
        srcs = [_find_piece(c, pc.lo, pc.hi) for c in curves]
        if all(isinstance(s, ConstPiece) or s is None for s in srcs):
            vals = [(s.vec if s is not None else c.default)[None, :] for s, c in zip(srcs, curves)]
            pieces.append(ConstPiece(pc.lo, pc.hi, np.asarray(F(*vals), float).reshape(-1)))
        else:
            pieces.append(pc)
    return PiecewiseCurve(dom, tuple(pieces), out.dim, out.default, out.exceptions)


def add(x: PiecewiseCurve, y: PiecewiseCurve) -> PiecewiseCurve:
    """Pointwise sum; non-constant cells become SumPieces so closed forms survive."""
    out = lift_continuous(lambda u, v: u + v, [x, y])
    pieces = []
    for pc in out.pieces:
        if isinstance(pc, ConstPiece):
            pieces.append(pc)
            continue
        parts = [s if s is not None else ConstPiece(pc.lo, pc.hi, c.default)
                 for s, c in ((_find_piece(c, pc.lo, pc.hi), c) for c in (x, y))]
        pieces.append(SumPiece(pc.lo, pc.hi, parts))
    return PiecewiseCurve(out.domain, tuple(pieces), out.dim, out.default, out.exceptions)


def sub(x: PiecewiseCurve, y: PiecewiseCurve) -> PiecewiseCurve:
    return add(x, y.scale(-1.0))


def zip_curves(*curves: PiecewiseCurve) -> PiecewiseCurve:
    return lift_continuous(lambda *v: np.concatenate(v, axis=1), curves)


def interior_samples(cells: Sequence[tuple[float, float]], per_cell: int = 33) -> np.ndarray:
    """Gauss-Chebyshev points strictly inside each cell."""
    k = np.arange(per_cell)
    x = (1 - np.cos(np.pi * (k + 0.5) / per_cell)) / 2
    return np.concatenate([l + (r - l) * x for l, r in cells]) if cells else np.empty(0)


def ae_equal(g1: PiecewiseCurve, g2: PiecewiseCurve, tol: float = 1e-12, per_cell: int = 33) -> bool:
    """Sampled test of equality almost everywhere (sup-distance on cell interiors <= tol)."""
    _check_common_domain([g1, g2])
    if g1.dim != g2.dim:
        raise IncompatibleDomains("curves have different dimensions")
    pts = sorted(set(g1.breakpoints()) | set(g2.breakpoints()))
    cells = [(l, r) for l, r in zip(pts, pts[1:]) if r > l]
    t = interior_samples(cells, per_cell)
    u, v = g1(t), g2(t)
    with np.errstate(invalid="ignore"):
        diff = np.where(u == v, 0.0, np.abs(u - v))
    diff = np.where(np.isnan(diff), np.inf, diff)
    return bool(np.max(diff, initial=0.0) <= tol)


# --------------------------------------------------------------------------- sampled data


def from_borel_samples(grid, values, jump_tol: float) -> PiecewiseCurve:
    """Build a piecewise-linear representative from samples, splitting at detected jumps.

    A jump is declared between consecutive samples whose values differ by more
    than ``jump_tol`` in the max norm; the new piece boundary is the midpoint.
    """
    t = np.asarray(grid, dtype=float)
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if t.ndim != 1 or len(t) < 2 or len(v) != len(t):
        raise InvalidInput("need at least two samples with matching lengths")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
        raise InvalidInput("samples must be finite")
    if np.any(np.diff(t) <= 0):
        raise InvalidInput("grid must be strictly increasing")
    if not jump_tol > 0:
        raise InvalidParameter("jump_tol must be positive")
    jumps = np.nonzero(np.max(np.abs(np.diff(v, axis=0)), axis=1) > jump_tol)[0]
    starts = np.concatenate([[0], jumps + 1])
    ends = np.concatenate([jumps + 1, [len(t)]])
    bounds = [t[0]] + [(t[j] + t[j + 1]) / 2 for j in jumps] + [t[-1]]
    pieces: list[Piece] = []
    for k, (s, e) in enumerate(zip(starts, ends)):
        ts, vs = t[s:e], v[s:e]
        lo, hi = bounds[k], bounds[k + 1]
        if len(ts) == 1:
            pieces.append(ConstPiece(lo, hi, vs[0]))
        else:
            pieces.append(FunctionPiece(lo, hi, _interp(ts, vs), v.shape[1]))
    return PiecewiseCurve(Interval(t[0], t[-1]), tuple(pieces), v.shape[1])


def _interp(ts: np.ndarray, vs: np.ndarray):
    def fn(x):
        x = np.asarray(x, dtype=float)
        return np.stack([np.interp(x, ts, vs[:, j]) for j in range(vs.shape[1])], axis=1)
    return fn
