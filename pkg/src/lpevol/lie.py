"""Matrix Lie groups: membership, exponential/logarithm, translations, Maurer-Cartan form.

Every group is realized as a closed subgroup of GL(n); tangent vectors at g are
n x n matrices of the form g A with A in the Lie algebra.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import Incompatible, InvalidParameter, InvalidTangent, OutOfChart

log = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-9


def _scaled_tol(M, base=MEMBERSHIP_TOL):
    return base * max(1.0, float(np.max(np.abs(M))))


class MatrixGroup:
    """Base class; subclasses override the predicates and closed-form exponentials."""

    name = "group"
    abelian = False
    has_closed_form_exp = False

    def __init__(self, n: int):
        self.n = int(n)

    # predicates -----------------------------------------------------------
    def is_member(self, M, tol: float | None = None) -> bool:
        M = np.asarray(M, dtype=float)
        return M.shape == (self.n, self.n) and bool(np.all(np.isfinite(M)))

    def is_algebra(self, A, tol: float | None = None) -> bool:
        A = np.asarray(A, dtype=float)
        return A.shape == (self.n, self.n) and bool(np.all(np.isfinite(A)))

    # coordinates ----------------------------------------------------------
    @property
    def algebra_dim(self) -> int:
        return self.n * self.n

    def hat(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float).reshape(self.n, self.n)

    def identity(self) -> np.ndarray:
        return np.eye(self.n)

    def exp(self, A) -> np.ndarray:
        return scipy.linalg.expm(np.asarray(A, dtype=float))

    def exp_many(self, As) -> np.ndarray:
        return np.stack([self.exp(A) for A in As]) if len(As) else np.empty((0, self.n, self.n))

    def project(self, M) -> np.ndarray:
        return np.asarray(M, dtype=float)

    def random_algebra(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        return scale * rng.standard_normal((self.n, self.n))

    def __eq__(self, other):
        return type(self) is type(other) and self.n == other.n

    def __hash__(self):
        return hash((type(self).__name__, self.n))

    def __repr__(self):
        return f"{self.name}"


class GL(MatrixGroup):
    def __init__(self, n: int = 2):
        super().__init__(n)
        self.name = f"GL({n})"

    def is_member(self, M, tol=None):
        if not super().is_member(M):
            return False
        M = np.asarray(M, dtype=float)
        return abs(np.linalg.det(M)) > (tol if tol is not None else _scaled_tol(M))


class PositiveScalars(MatrixGroup):
    name = "PositiveScalars"
    abelian = True
    has_closed_form_exp = True

    def __init__(self):
        super().__init__(1)

    def is_member(self, M, tol=None):
        return super().is_member(M) and float(np.asarray(M)[0, 0]) > 0

    def exp(self, A):
        return np.exp(np.asarray(A, dtype=float)).reshape(1, 1)

    def exp_many(self, As):
        return np.exp(np.asarray(As, dtype=float)).reshape(-1, 1, 1)


class Translations(MatrixGroup):
    """R^d as affine matrices [[I, v], [0, 1]]."""

    abelian = True
    has_closed_form_exp = True

    def __init__(self, d: int = 3):
        super().__init__(d + 1)
        self.d = d
        self.name = f"Translation({d})"

    @property
    def algebra_dim(self):
        return self.d

    def hat(self, x):
        A = np.zeros((self.n, self.n))
        A[: self.d, self.d] = np.asarray(x, dtype=float).reshape(self.d)
        return A

    def vee(self, A):
        return np.asarray(A)[..., : self.d, self.d]

    def is_member(self, M, tol=None):
        if not super().is_member(M):
            return False
        M = np.asarray(M, dtype=float)
        tol = _scaled_tol(M) if tol is None else tol
        E = M.copy()
        E[: self.d, self.d] = 0.0
        return bool(np.max(np.abs(E - np.eye(self.n))) <= tol)

    def is_algebra(self, A, tol=None):
        if not super().is_algebra(A):
            return False
        A = np.asarray(A, dtype=float)
        tol = _scaled_tol(A) if tol is None else tol
        E = A.copy()
        E[: self.d, self.d] = 0.0
        return bool(np.max(np.abs(E)) <= tol)

    def exp(self, A):
        # the algebra is nilpotent of order 2
        return np.eye(self.n) + np.asarray(A, dtype=float)

    def exp_many(self, As):
        return np.eye(self.n)[None] + np.asarray(As, dtype=float)

    def random_algebra(self, rng, scale=1.0):
        return self.hat(scale * rng.standard_normal(self.d))


def so3_hat(w) -> np.ndarray:
    x, y, z = np.asarray(w, dtype=float).reshape(3)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def so3_vee(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    return np.stack([A[..., 2, 1], A[..., 0, 2], A[..., 1, 0]], axis=-1)


def rodrigues(A) -> np.ndarray:
    """exp of a skew 3x3 matrix via Rodrigues' formula."""
    A = np.asarray(A, dtype=float)
    theta = float(np.linalg.norm(so3_vee(A)))
    A2 = A @ A
    if theta < 1e-6:
        t2 = theta * theta
        s = 1 - t2 / 6 + t2 * t2 / 120
        c = 0.5 - t2 / 24 + t2 * t2 / 720
    else:
        s = math.sin(theta) / theta
        c = (1 - math.cos(theta)) / (theta * theta)
    return np.eye(3) + s * A + c * A2


class SO3(MatrixGroup):
    name = "SO(3)"
    has_closed_form_exp = True

    def __init__(self):
        super().__init__(3)

    @property
    def algebra_dim(self):
        return 3

    def hat(self, x):
        x = np.asarray(x, dtype=float)
        return x.reshape(3, 3) if x.size == 9 else so3_hat(x)

    def is_member(self, M, tol=None):
        if not super().is_member(M):
            return False
        M = np.asarray(M, dtype=float)
        tol = MEMBERSHIP_TOL if tol is None else tol
        return (float(np.max(np.abs(M.T @ M - np.eye(3)))) <= tol
                and abs(np.linalg.det(M) - 1) <= tol)

    def is_algebra(self, A, tol=None):
        if not super().is_algebra(A):
            return False
        A = np.asarray(A, dtype=float)
        tol = _scaled_tol(A) if tol is None else tol
        return float(np.max(np.abs(A + A.T))) <= tol

    def exp(self, A):
        return rodrigues(A)

    def project(self, M):
        """Nearest rotation (polar factor)."""
        U, _, Vt = np.linalg.svd(np.asarray(M, dtype=float))
        R = U @ Vt
        if np.linalg.det(R) < 0:
            U[:, -1] *= -1
            R = U @ Vt
        return R

    def random_algebra(self, rng, scale=1.0):
        return so3_hat(scale * rng.standard_normal(3))


class SE2(MatrixGroup):
    name = "SE(2)"

    def __init__(self):
        super().__init__(3)

    @property
    def algebra_dim(self):
        return 3

    def hat(self, x):
        x = np.asarray(x, dtype=float)
        if x.size == 9:
            return x.reshape(3, 3)
        th, vx, vy = x
        return np.array([[0.0, -th, vx], [th, 0.0, vy], [0.0, 0.0, 0.0]])

    def is_member(self, M, tol=None):
        if not super().is_member(M):
            return False
        M = np.asarray(M, dtype=float)
        tol = MEMBERSHIP_TOL if tol is None else tol
        R = M[:2, :2]
        return (float(np.max(np.abs(R.T @ R - np.eye(2)))) <= tol and abs(np.linalg.det(R) - 1) <= tol
                and float(np.max(np.abs(M[2] - [0, 0, 1]))) <= tol)

    def is_algebra(self, A, tol=None):
        if not super().is_algebra(A):
            return False
        A = np.asarray(A, dtype=float)
        tol = _scaled_tol(A) if tol is None else tol
        return (abs(A[0, 0]) <= tol and abs(A[1, 1]) <= tol and abs(A[0, 1] + A[1, 0]) <= tol
                and float(np.max(np.abs(A[2]))) <= tol)

    def random_algebra(self, rng, scale=1.0):
        return self.hat(scale * rng.standard_normal(3))


class Heisenberg(MatrixGroup):
    """Upper unitriangular 3x3 matrices."""

    name = "Heisenberg(3)"
    has_closed_form_exp = True

    def __init__(self):
        super().__init__(3)

    @property
    def algebra_dim(self):
        return 3

    def hat(self, x):
        x = np.asarray(x, dtype=float)
        if x.size == 9:
            return x.reshape(3, 3)
        A = np.zeros((3, 3))
        A[0, 1], A[1, 2], A[0, 2] = x
        return A

    def is_member(self, M, tol=None):
        if not super().is_member(M):
            return False
        M = np.asarray(M, dtype=float)
        tol = _scaled_tol(M) if tol is None else tol
        low = np.tril(M, -1)
        return float(np.max(np.abs(low))) <= tol and float(np.max(np.abs(np.diag(M) - 1))) <= tol

    def is_algebra(self, A, tol=None):
        if not super().is_algebra(A):
            return False
        A = np.asarray(A, dtype=float)
        tol = _scaled_tol(A) if tol is None else tol
        return float(np.max(np.abs(np.tril(A)))) <= tol

    def exp(self, A):
        A = np.asarray(A, dtype=float)
        return np.eye(3) + A + A @ A / 2

    def random_algebra(self, rng, scale=1.0):
        return self.hat(scale * rng.standard_normal(3))


GROUPS: dict[str, Callable[..., MatrixGroup]] = {
    "gl": GL,
    "positive_scalars": PositiveScalars,
    "translation": Translations,
    "so3": SO3,
    "se2": SE2,
    "heisenberg": Heisenberg,
}


def make_group(name: str, **params) -> MatrixGroup:
    key = name.strip().lower().replace("-", "_").replace("(", "").replace(")", "")
    aliases = {"translations": "translation", "scalars": "positive_scalars", "so_3": "so3",
               "se_2": "se2", "heisenberg3": "heisenberg"}
    key = aliases.get(key, key)
    if key not in GROUPS:
        raise InvalidParameter(f"unknown group {name!r}; known: {sorted(GROUPS)}")
    return GROUPS[key](**params)


# --------------------------------------------------------------------------- elements


@dataclass(frozen=True, eq=False)
class GroupElement:
    group: MatrixGroup
    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if not self.group.is_member(M):
            raise InvalidParameter(f"matrix is not an element of {self.group}")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        _same_group(self.group, other.group)
        return GroupElement(self.group, self.matrix @ other.matrix)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.group, np.linalg.inv(self.matrix))

    @classmethod
    def identity(cls, group: MatrixGroup) -> "GroupElement":
        return cls(group, group.identity())


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    group: MatrixGroup
    mat: np.ndarray

    def __post_init__(self):
        A = np.array(self.mat, dtype=float)
        if not self.group.is_algebra(A):
            raise InvalidParameter(f"matrix is not in the Lie algebra of {self.group}")
        object.__setattr__(self, "mat", A)


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: GroupElement
    mat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mat", np.array(self.mat, dtype=float))


def _same_group(g: MatrixGroup, h: MatrixGroup):
    if g != h:
        raise Incompatible(f"{g} and {h} are different groups")


def exp_alg(A: AlgebraElement) -> GroupElement:
    G = A.group
    M = G.exp(A.mat)
    if not G.is_member(M):
        M = G.project(M)
    return GroupElement(G, M)


def log_grp(g: GroupElement) -> AlgebraElement:
    """Principal logarithm for ||g - I||_2 < 0.5."""
    n = g.group.n
    dist = float(np.linalg.norm(g.matrix - np.eye(n), 2))
    if dist >= 0.5:
        raise OutOfChart(f"||g - I|| = {dist:.3g} is outside the logarithm chart")
    L = scipy.linalg.logm(g.matrix)
    return AlgebraElement(g.group, np.real(L))


def left_act(g: GroupElement, w: TangentVector) -> TangentVector:
    _same_group(g.group, w.base.group)
    return TangentVector(g @ w.base, g.matrix @ w.mat)


def right_act(v: TangentVector, h: GroupElement) -> TangentVector:
    _same_group(v.base.group, h.group)
    return TangentVector(v.base @ h, v.mat @ h.matrix)


def tangent_product(v: TangentVector, w: TangentVector) -> TangentVector:
    """T m(v, w) = g.w + v.h for v at g and w at h."""
    g, h = v.base, w.base
    return TangentVector(g @ h, left_act(g, w).mat + right_act(v, h).mat)


def maurer_cartan(v: TangentVector) -> AlgebraElement:
    A = np.linalg.solve(v.base.matrix, v.mat)
    if not v.base.group.is_algebra(A, _scaled_tol(A, 1e-8)):
        raise InvalidTangent("tangent vector does not come from the Lie algebra")
    return AlgebraElement(v.base.group, A)


# --------------------------------------------------------------------------- homomorphisms


@dataclass(frozen=True)
class Homomorphism:
    """Group homomorphism f with its Lie algebra map L(f).

    ``tangent`` is the tangent map T f(g, v) when known; it is used to push curves
    forward without going through the algebra map.
    """

    source: MatrixGroup
    target: MatrixGroup
    element_map: Callable[[np.ndarray], np.ndarray]
    algebra_map: Callable[[np.ndarray], np.ndarray]
    tangent: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    name: str = "f"

    def __call__(self, g: GroupElement) -> GroupElement:
        _same_group(self.source, g.group)
        return GroupElement(self.target, self.element_map(g.matrix))

    def on_algebra(self, A: AlgebraElement) -> AlgebraElement:
        _same_group(self.source, A.group)
        return AlgebraElement(self.target, self.algebra_map(A.mat))


def adjugate(M: np.ndarray) -> np.ndarray:
    """Classical adjoint from cofactors."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if n == 1:
        return np.ones((1, 1))
    C = np.empty_like(M)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(M, i, axis=0), j, axis=1)
            C[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return C.T


def hom_det(n: int = 2) -> Homomorphism:
    """det: GL+(n) -> PositiveScalars with L(det) = trace; tangent map by Jacobi's formula."""
    return Homomorphism(
        GL(n), PositiveScalars(),
        element_map=lambda M: np.array([[np.linalg.det(M)]]),
        algebra_map=lambda A: np.array([[np.trace(A)]]),
        tangent=lambda M, V: np.array([[np.trace(adjugate(M) @ V)]]),
        name="det",
    )


def hom_identity(G: MatrixGroup) -> Homomorphism:
    return Homomorphism(G, G, lambda M: np.array(M, dtype=float), lambda A: np.array(A, dtype=float),
                        lambda M, V: np.array(V, dtype=float), name="id")


def hom_inclusion(G: MatrixGroup) -> Homomorphism:
    """Inclusion of a matrix group into GL(n)."""
    return Homomorphism(G, GL(G.n), lambda M: np.array(M, dtype=float),
                        lambda A: np.array(A, dtype=float), lambda M, V: np.array(V, dtype=float),
                        name="inclusion")
