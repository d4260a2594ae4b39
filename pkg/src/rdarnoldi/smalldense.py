"""Dense kernels for the small projected matrices (m up to ~100).

All routines take anything ``numpy.asarray`` accepts and return numpy
arrays. Real input stays real; complex input stays complex.
"""

import math
import warnings

import numpy as np
import scipy.linalg as sla

from .errors import ExpmOverflow, NoConvergence, NotHermitian, SingularMatrix

PIVOT_RTOL = 1e-14


def as_dense(A, *, square=False):
    """Validate and return ``A`` as a 2-D finite float/complex array."""
    A = np.asarray(A)
    if A.dtype.kind not in "fc":
        A = A.astype(float)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def lu_solve(A, B):
    """Solve ``A X = B`` by LU with partial pivoting.

    Raises SingularMatrix when a pivot falls below ``1e-14 * max|A|``.
    """
    A = as_dense(A, square=True)
    B = np.asarray(B)
    vector_rhs = B.ndim == 1
    if B.shape[0] != A.shape[0]:
        raise ValueError("right-hand side row count does not match A")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < PIVOT_RTOL * scale:
        raise SingularMatrix("pivot below threshold; matrix is numerically singular")
    X = sla.lu_solve((lu, piv), B.reshape(A.shape[0], -1), check_finite=False)
    return X.ravel() if vector_rhs else X


def inv(A):
    A = as_dense(A, square=True)
    return lu_solve(A, np.eye(A.shape[0], dtype=A.dtype))


# Pade degrees and the 1-norm thresholds below which each is accurate to unit roundoff
_PADE_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}
_PADE_B = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0, 670442572800.0,
         33522128640.0, 1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0),
}
MAX_SQUARINGS = 60
SHIFT_NORM_LIMIT = 500.0


def _pade_uv(A, deg):
    b = _PADE_B[deg]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    if deg < 13:
        powers = [ident, A2]
        for _ in range(2, deg // 2 + 1):
            powers.append(powers[-1] @ A2)
        U = A @ sum(b[2 * j + 1] * P for j, P in enumerate(powers))
        V = sum(b[2 * j] * P for j, P in enumerate(powers))
        return U, V
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident
    return U, V


def expm(A):
    """Matrix exponential by scaling and squaring with diagonal Pade approximants.

    ``A`` is first shifted by ``mu = trace(A)/n`` when that lowers its 1-norm
    below 500 (``e^A = e^mu e^{A - mu I}``). The degree (3 to 13) and the number of
    squarings then follow from the 1-norm. Raises ExpmOverflow when more than 60 squarings would be needed or
    the result is not finite. Exactly Hermitian input goes through its
    eigendecomposition instead, which keeps full relative accuracy.
    """
    A = as_dense(A, square=True)
    n = A.shape[0]
    if n == 0:
        return A.copy()
    if np.array_equal(A, A.conj().T):
        w, Q = np.linalg.eigh(A)
        if w[-1] > 709.0:
            raise ExpmOverflow("matrix exponential overflowed")
        return (Q * np.exp(w)) @ Q.conj().T
    mu = np.trace(A) / n
    shifted = A - mu * np.eye(n, dtype=A.dtype)
    nrm = np.linalg.norm(A, 1)
    # the shift is skipped for widely spread spectra, where e^{A - mu I} would overflow
    if np.linalg.norm(shifted, 1) < min(nrm, SHIFT_NORM_LIMIT):
        A, nrm = shifted, np.linalg.norm(shifted, 1)
    else:
        mu = 0.0
    s = 0
    for deg in (3, 5, 7, 9):
        if nrm <= _PADE_THETA[deg]:
            break
    else:
        deg = 13
        if nrm > _PADE_THETA[13]:
            s = int(math.ceil(math.log2(nrm / _PADE_THETA[13])))
        if s > MAX_SQUARINGS:
            raise ExpmOverflow(f"norm {nrm:.3e} needs more than {MAX_SQUARINGS} squarings")
        A = A / 2.0**s
    U, V = _pade_uv(A, deg)
    with np.errstate(all="ignore"):
        X = lu_solve(V - U, V + U)
        for _ in range(s):
            X = X @ X
        if mu != 0.0:
            X = np.exp(mu) * X
    if not np.all(np.isfinite(X)):
        raise ExpmOverflow("matrix exponential overflowed")
    return X


def is_upper_hessenberg(H, rtol=0.0):
    H = np.asarray(H)
    below = np.tril(H, -2)
    return np.max(np.abs(below), initial=0.0) <= rtol * np.max(np.abs(H), initial=0.0)


def hessenberg_eigenvalues(H):
    """All eigenvalues of an upper Hessenberg matrix (shifted QR via LAPACK)."""
    H = as_dense(H, square=True)
    if not is_upper_hessenberg(H):
        raise ValueError("matrix is not upper Hessenberg")
    try:
        return sla.eigvals(H, check_finite=False, overwrite_a=False)
    except sla.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def hermitian_eigen_extremes(A, rtol=1e-12):
    """Return ``(min_eig, max_eig)`` of a Hermitian matrix."""
    A = as_dense(A, square=True)
    norm = np.linalg.norm(A)
    if np.linalg.norm(A - A.conj().T) > rtol * max(norm, np.finfo(float).tiny):
        raise NotHermitian("matrix is not Hermitian to the requested tolerance")
    w = sla.eigvalsh(A, check_finite=False)
    return float(w[0]), float(w[-1])
