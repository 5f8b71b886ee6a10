"""Liouville-space vectorization and the su(2)/su(1,1) superoperator generators.

Operators are vectorized row-major over (ket, bra): the operator ``A`` maps to
the vector whose entry ``m*d + n`` is ``A[m, n]``.  Liouville vectors are plain
1-D complex numpy arrays of length ``d*d``; density matrices are 2-D arrays.

Two dynamical-symmetry algebras are supported.

su(2) x u(1), two-level system (basis index 0 = spin up, 1 = spin down)::

    L+ rho = s+ rho s-          L- rho = s- rho s+
    L0 rho = (sz rho + rho sz)/4
    R  rho = (sz rho - rho sz)/2

su(1,1) x u(1), harmonic oscillator truncated to ``N`` Fock levels::

    K- rho = a rho a^+          K+ rho = a^+ rho a
    K0 rho = (n rho + rho n + rho)/2
    R  rho = n rho - rho n

Both satisfy ``[L-, L+] = 2 sigma L0`` and ``[L0, L+-] = +-L+-`` with
``sigma = -1`` for su(2) and ``sigma = +1`` for su(1,1).  On the truncated
oscillator space ``K+`` drops amplitude pushed past level ``N-1``.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import DimensionMismatch

__all__ = [
    "AlgebraKind",
    "Generator",
    "vectorize",
    "devectorize",
    "liouville_dim",
    "hs_inner",
    "apply_superop",
    "apply_to_operator",
    "superop_matrix",
    "sigma_plus",
    "sigma_minus",
    "sigma_z",
    "annihilation",
    "number_op",
    "zero_eigenvalues",
    "r_eigenvalues",
]


class AlgebraKind(enum.Enum):
    SU2 = "su2"
    SU11 = "su11"

    @property
    def sigma(self) -> int:
        """Sign in ``[L-, L+] = 2 sigma L0``: -1 for su(2), +1 for su(1,1)."""
        return -1 if self is AlgebraKind.SU2 else 1

    @classmethod
    def parse(cls, value) -> "AlgebraKind":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("(", "").replace(")", "").replace(",", "")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown algebra kind {value!r}")


class Generator(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    ZERO = "zero"
    R = "r"
    CASIMIR = "casimir"
    IDENTITY = "identity"


# -- vectorization -----------------------------------------------------------


def vectorize(rho) -> np.ndarray:
    """Map a d x d operator to its Liouville vector (row-major over ket, bra)."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
        raise DimensionMismatch(f"expected a square operator, got shape {rho.shape}")
    return np.array(rho, dtype=complex).reshape(-1)


def liouville_dim(v) -> int:
    """Hilbert-space dimension d of a Liouville vector of length d*d."""
    size = np.asarray(v).size
    d = math.isqrt(size)
    if d * d != size or d < 1:
        raise DimensionMismatch(f"vector length {size} is not a perfect square")
    return d


def devectorize(v) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D Liouville vector, got shape {v.shape}")
    d = liouville_dim(v)
    return np.array(v, dtype=complex).reshape(d, d)


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt scalar product ``Tr[A^+ B]`` of two Liouville vectors."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(
            f"incompatible Liouville spaces: {a.shape} vs {b.shape}"
        )
    return complex(np.vdot(a, b))


# -- Hilbert-space building blocks -------------------------------------------


def sigma_plus() -> np.ndarray:
    """Raising operator |up><down| (up is basis index 0)."""
    return np.array([[0, 1], [0, 0]], dtype=complex)


def sigma_minus() -> np.ndarray:
    return np.array([[0, 0], [1, 0]], dtype=complex)


def sigma_z() -> np.ndarray:
    return np.array([[1, 0], [0, -1]], dtype=complex)


def annihilation(n: int) -> np.ndarray:
    """Truncated bosonic annihilation operator on ``n`` Fock levels."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)


def number_op(n: int) -> np.ndarray:
    return np.diag(np.arange(n, dtype=float)).astype(complex)


def zero_eigenvalues(kind: AlgebraKind, d: int) -> np.ndarray:
    """Eigenvalues of the (diagonal) L0 generator on the |m><n| basis, as d x d."""
    if kind is AlgebraKind.SU2:
        z = np.array([1.0, -1.0])
        return (z[:, None] + z[None, :]) / 4
    n = np.arange(d, dtype=float)
    return (n[:, None] + n[None, :] + 1) / 2


def r_eigenvalues(kind: AlgebraKind, d: int) -> np.ndarray:
    """Eigenvalues of the u(1) generator R on the |m><n| basis, as d x d."""
    if kind is AlgebraKind.SU2:
        z = np.array([1.0, -1.0])
        return (z[:, None] - z[None, :]) / 2
    n = np.arange(d, dtype=float)
    return n[:, None] - n[None, :]


def _check_dim(kind: AlgebraKind, d: int) -> None:
    if kind is AlgebraKind.SU2 and d != 2:
        raise DimensionMismatch(f"su(2) generators act on 2x2 operators, got d={d}")
    if kind is AlgebraKind.SU11 and d < 2:
        raise DimensionMismatch(f"su(1,1) truncation must be >= 2, got {d}")


def apply_to_operator(kind: AlgebraKind, gen: Generator, x: np.ndarray) -> np.ndarray:
    """Apply a generator to an operator given in matrix form."""
    kind = AlgebraKind.parse(kind)
    gen = Generator(gen)
    d = x.shape[0]
    _check_dim(kind, d)
    if gen is Generator.IDENTITY:
        return x.copy()
    if gen is Generator.ZERO:
        return zero_eigenvalues(kind, d) * x
    if gen is Generator.R:
        return r_eigenvalues(kind, d) * x

    if kind is AlgebraKind.SU2:
        sp, sm, sz = sigma_plus(), sigma_minus(), sigma_z()
        if gen is Generator.PLUS:
            return sp @ x @ sm
        if gen is Generator.MINUS:
            return sm @ x @ sp
        if gen is Generator.CASIMIR:
            return 3.0 / 8.0 * (x + sz @ x @ sz)
    else:
        # slicing instead of matmul: K+- only shift along the diagonals
        s = np.sqrt(np.arange(d, dtype=float))
        out = np.zeros_like(x)
        if gen is Generator.PLUS:
            # (a^+ X a)_{mn} = sqrt(m n) X_{m-1,n-1}
            out[1:, 1:] = np.outer(s[1:], s[1:]) * x[:-1, :-1]
            return out
        if gen is Generator.MINUS:
            # (a X a^+)_{mn} = sqrt((m+1)(n+1)) X_{m+1,n+1}
            out[:-1, :-1] = np.outer(s[1:], s[1:]) * x[1:, 1:]
            return out
        if gen is Generator.CASIMIR:
            n = np.arange(d, dtype=float)
            diff = n[:, None] - n[None, :]
            return (diff**2 - 1) / 4 * x
    raise ValueError(f"unsupported generator {gen!r}")


def apply_superop(kind: AlgebraKind, gen: Generator, v) -> np.ndarray:
    """Exact action of a named superoperator on a vectorized operator.

    Args:
        kind: which algebra the generator belongs to.
        gen: generator name.
        v: Liouville vector of length d*d (d = 2 for su(2), d = truncation
            for su(1,1)).

    Returns:
        The vectorized image, same length as ``v``.
    """
    return apply_to_operator(kind, gen, devectorize(v)).reshape(-1)


def superop_matrix(kind: AlgebraKind, gen: Generator, d: int) -> np.ndarray:
    """Dense (d*d) x (d*d) matrix of a generator, assembled column by column."""
    kind = AlgebraKind.parse(kind)
    _check_dim(kind, d)
    size = d * d
    m = np.zeros((size, size), dtype=complex)
    e = np.zeros(size, dtype=complex)
    for j in range(size):
        e[j] = 1.0
        m[:, j] = apply_superop(kind, gen, e)
        e[j] = 0.0
    return m
