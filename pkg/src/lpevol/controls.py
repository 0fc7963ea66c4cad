"""Constructors for the control families used in examples, tests and the CLI.

Values may be scalars, vectors or square matrices; matrices are flattened
row-major so a control for an n x n group has dimension n*n.
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidInput
from .measurable import (ConstPiece, FunctionPiece, Interval, PiecewiseCurve, PowerPiece,
                         ScaledPiece, as_interval)


def _flat(v) -> np.ndarray:
    return np.atleast_1d(np.asarray(v, dtype=float)).reshape(-1)


def constant(value, domain=(0.0, 1.0)) -> PiecewiseCurve:
    dom = as_interval(domain)
    v = _flat(value)
    return PiecewiseCurve(dom, (ConstPiece(dom.a, dom.b, v),), v.size)


def step(times, values, domain=(0.0, 1.0)) -> PiecewiseCurve:
    """Piecewise constant control; ``times`` are the interior jump locations."""
    dom = as_interval(domain)
    knots = [dom.a, *map(float, times), dom.b]
    if len(values) != len(knots) - 1:
        raise InvalidInput("need one value per segment")
    if any(r <= l for l, r in zip(knots, knots[1:])):
        raise InvalidInput("jump times must be increasing and interior")
    vals = [_flat(v) for v in values]
    pieces = tuple(ConstPiece(l, r, v) for l, r, v in zip(knots, knots[1:], vals))
    return PiecewiseCurve(dom, pieces, vals[0].size)


def polynomial(coeffs, domain=(0.0, 1.0)) -> PiecewiseCurve:
    """gamma(t) = sum_k coeffs[k] * t**k."""
    dom = as_interval(domain)
    C = np.stack([_flat(c) for c in coeffs])

    def fn(t):
        t = np.asarray(t, dtype=float)
        powers = t[:, None] ** np.arange(len(C))[None, :]
        return powers @ C

    return PiecewiseCurve(dom, (FunctionPiece(dom.a, dom.b, fn, C.shape[1]),), C.shape[1])


def trig(terms, domain=(0.0, 1.0)) -> PiecewiseCurve:
    """gamma(t) = sum amp * sin(freq * t + phase) over ``terms`` of (amp, freq, phase)."""
    dom = as_interval(domain)
    amps = np.stack([_flat(a) for a, _, _ in terms])
    freqs = np.array([float(f) for _, f, _ in terms])
    phases = np.array([float(p) for _, _, p in terms])

    def fn(t):
        t = np.asarray(t, dtype=float)
        return np.sin(t[:, None] * freqs[None, :] + phases[None, :]) @ amps

    return PiecewiseCurve(dom, (FunctionPiece(dom.a, dom.b, fn, amps.shape[1]),), amps.shape[1])


def scalar_times(phi, vec, domain=(0.0, 1.0)) -> PiecewiseCurve:
    """gamma(t) = phi(t) * vec with a vectorized scalar ``phi``."""
    dom = as_interval(domain)
    v = _flat(vec)
    return PiecewiseCurve(dom, (ScaledPiece(dom.a, dom.b, phi, v),), v.size)


def power(coeff, exponent: float, domain=(0.0, 1.0)) -> PiecewiseCurve:
    """gamma(t) = coeff * (t - a)**exponent, handled in closed form."""
    dom = as_interval(domain)
    v = _flat(coeff)
    return PiecewiseCurve(dom, (PowerPiece(dom.a, dom.b, v, exponent, dom.a),), v.size)


def function(fn, dim: int, domain=(0.0, 1.0)) -> PiecewiseCurve:
    dom = as_interval(domain)
    return PiecewiseCurve(dom, (FunctionPiece(dom.a, dom.b, fn, dim),), dim)


def point_indicator(point: float, dim: int = 1, domain=(0.0, 1.0)) -> PiecewiseCurve:
    """Zero curve whose value at ``point`` is 1: a representative of the zero class."""
    dom = as_interval(domain)
    zero = ConstPiece(dom.a, dom.b, np.zeros(dim))
    return PiecewiseCurve(dom, (zero,), dim, np.ones(dim), (point,))


__all__ = ["constant", "step", "polynomial", "trig", "scalar_times", "power", "function",
           "point_indicator", "Interval"]
