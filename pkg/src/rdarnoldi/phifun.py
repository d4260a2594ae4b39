"""Scalar and matrix phi-functions and their evaluation on the projected matrix.

``phi_0(z) = exp(z)`` and ``phi_{k+1}(z) = (phi_k(z) - 1/k!) / z``.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularHessenberg, SingularMatrix
from .smalldense import as_dense, expm, lu_solve

K_MAX = 6
TAYLOR_RADIUS = 0.5


def taylor_radius(k):
    """Switch radius between the series and the recurrence for ``phi_k``.

    The recurrence divides by ``z`` k times and loses about ``k log10(1/|z|)``
    digits, so the series is kept out to a radius growing with ``k``.
    """
    return TAYLOR_RADIUS if k <= 1 else min(0.5 * k + 0.5, 3.0)


def _phi_taylor(k, z):
    # sum_j z^j / (j+k)!
    term = 1.0 / math.factorial(k)
    total = term
    for j in range(1, 60):
        term = term * z / (j + k)
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total


def _phi_recurrence(k, z):
    val = cmath.exp(z)
    for j in range(k):
        val = (val - 1.0 / math.factorial(j)) / z
    return val


def phi_scalar(k, z):
    """``phi_k(z)`` for a scalar; Taylor series for ``|z| <`` :func:`taylor_radius`, recurrence otherwise."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    z = complex(z)
    if abs(z) < taylor_radius(k):
        return _phi_taylor(k, z)
    return _phi_recurrence(k, z)


def _check_k(k):
    if not 0 <= k <= K_MAX:
        raise ValueError(f"k must lie in [0, {K_MAX}]")


def phi_matrix_small(k, A):
    """``phi_k(A)`` from the exponential of the block matrix ``[[A, I, 0..], [0, 0, I, ..], ...]``.

    The top-right ``n x n`` block of ``exp`` of the ``(k+1)n`` square augmented
    matrix equals ``phi_k(A)``.
    """
    _check_k(k)
    A = as_dense(A, square=True)
    n = A.shape[0]
    if n > 200:
        raise ValueError("phi_matrix_small is meant for n <= 200")
    if k == 0:
        return expm(A)
    N = (k + 1) * n
    W = np.zeros((N, N), dtype=A.dtype)
    W[:n, :n] = A
    eye = np.eye(n)
    for b in range(k):
        W[b * n : (b + 1) * n, (b + 1) * n : (b + 2) * n] = eye
    return expm(W)[:n, k * n :]


def phi_vector_small(k, A, b):
    """``phi_k(A) b`` from one exponential of the ``(n+k)`` square augmented matrix."""
    _check_k(k)
    A = as_dense(A, square=True)
    b = np.asarray(b)
    n = A.shape[0]
    if k == 0:
        return expm(A) @ b
    W = np.zeros((n + k, n + k), dtype=np.result_type(A, b))
    W[:n, :n] = A
    W[:n, n] = b
    for j in range(1, k):
        W[n + j - 1, n + j] = 1.0
    return expm(W)[:n, n + k - 1]


@dataclass(frozen=True)
class PhiRequest:
    """Problem statement for ``y = phi_k(h L) v`` with pole parameter ``delta = h / tau``."""

    k: int
    h: float
    v: np.ndarray = field(repr=False)
    tau: float

    def __post_init__(self):
        _check_k(self.k)
        if not self.h > 0:
            raise ValueError("time step h must be positive")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        object.__setattr__(self, "v", np.asarray(self.v))

    @classmethod
    def from_delta(cls, k, h, v, delta):
        return cls(k, h, v, h / delta)

    @property
    def delta(self):
        return self.h / self.tau


@dataclass
class PhiApproximation:
    """Iterate ``y_m`` of the rational Arnoldi method and its per-iteration record."""

    y: np.ndarray
    m: int
    report: object
    breakdown: bool = False
    converged: bool = False


def fk_on_hessenberg(req, H):
    """``f_k(H_m) e_1`` with ``f_k(z) = phi_k(tau (1 - 1/z))``.

    Evaluated as ``phi_k(S_m) e_1`` where ``S_m = tau (I - H_m^{-1})``.
    """
    H = as_dense(H, square=True)
    m = H.shape[0]
    eye = np.eye(m, dtype=H.dtype)
    try:
        Hinv = lu_solve(H, eye)
    except SingularMatrix as exc:
        raise SingularHessenberg("projected matrix H_m is singular; is L sectorial?") from exc
    S = req.tau * (eye - Hinv)
    e1 = np.zeros(m, dtype=S.dtype)
    e1[0] = 1.0
    return phi_vector_small(req.k, S, e1)


def phi_oracle_dense(k, h, L_dense, v):
    """Reference ``phi_k(h L) v`` from the full dense matrix (dimension up to 400)."""
    L_dense = as_dense(L_dense, square=True)
    if L_dense.shape[0] > 400:
        raise ValueError("dense oracle is limited to dimension 400")
    return phi_vector_small(k, h * L_dense, np.asarray(v))
