"""Adaptive quadrature front end (QUADPACK through scipy) and fixed Gauss-Legendre rules."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import InvalidParameter, NotInLp


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-13
    rel_tol: float = 1e-12
    max_depth: int = 200  # maximum number of adaptive subintervals

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise InvalidParameter("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise InvalidParameter("max_depth must be >= 1")


DEFAULT_QUAD = QuadratureConfig()


def integrate_scalar(f, lo: float, hi: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Integrate a vectorized scalar function ``f(t_array) -> values`` over [lo, hi].

    Raises NotInLp when QUADPACK reports divergence or exhausts its subdivision
    budget without reaching a usable error estimate.
    """
    if hi <= lo:
        return 0.0
    val, err, info = _quad(lambda x: float(f(np.array([x]))[0]), lo, hi, cfg)[:3]
    return val


def _quad(fun, lo, hi, cfg):
    out = integrate.quad(fun, lo, hi, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                         limit=cfg.max_depth, full_output=1)
    val, err, info = out[0], out[1], out[2]
    ier = 0 if len(out) == 3 else 1
    if not math.isfinite(val):
        raise NotInLp("integral is not finite")
    if ier and err > 1e-6 * max(1.0, abs(val)):
        raise NotInLp(f"quadrature did not converge (estimate {val}, error {err})")
    return val, err, info


def integrate_vector(f, lo: float, hi: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    """Integrate ``f(t_array) -> (m, d)`` over [lo, hi] componentwise."""
    if hi <= lo:
        probe = np.asarray(f(np.array([lo])))
        return np.zeros(probe.shape[1:])
    # cheap path: two Gauss rules that agree to tolerance settle smooth integrands
    with np.errstate(all="ignore"):
        coarse = gauss_integrate(f, lo, hi, 10)
        fine = gauss_integrate(f, lo, hi, 20)
    if np.all(np.isfinite(fine)):
        scale = float(np.max(np.abs(fine))) if fine.size else 0.0
        if float(np.max(np.abs(fine - coarse), initial=0.0)) <= max(cfg.abs_tol, cfg.rel_tol * scale):
            return fine
    res, err, info = integrate.quad_vec(lambda x: np.asarray(f(np.array([x])))[0], lo, hi,
                                        epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                                        limit=cfg.max_depth, full_output=True)
    res = np.asarray(res, dtype=float)
    if not np.all(np.isfinite(res)):
        raise NotInLp("integral is not finite")
    if info.status != 0 and err > 1e-6 * max(1.0, float(np.max(np.abs(res)))):
        raise NotInLp(f"vector quadrature did not converge (error {err})")
    return res


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0


def gauss_integrate(f, lo: float, hi: float, order: int = 12, panels: int = 1) -> np.ndarray:
    """Composite fixed-order Gauss-Legendre rule; ``f`` maps (m,) -> (m, d)."""
    x, w = gauss_legendre(order)
    edges = np.linspace(lo, hi, panels + 1)
    h = np.diff(edges)
    t = (edges[:-1, None] + h[:, None] * x[None, :]).ravel()
    vals = np.asarray(f(t)).reshape(panels, order, -1)
    return np.einsum("k,pkd->d", w, vals * h[:, None, None])
