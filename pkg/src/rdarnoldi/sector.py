"""Field-of-values geometry: boundary samples, sector semiangle, and the image region G_theta."""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import NotSectorial
from .operators import SectorialOperator
from .smalldense import as_dense, hermitian_eigen_extremes, inv

THETA_MARGIN = 0.01
DENSE_LIMIT = 500


@dataclass(frozen=True)
class SectorInfo:
    """Sector ``S_theta`` (vertex 0, semiangle ``theta``) containing ``F(L)``."""

    theta: float
    radius: float | None = None
    fov_points: np.ndarray = field(default=None, repr=False)

    @property
    def theta_for_bounds(self):
        """``theta`` plus a safety margin so ``F(L)`` sits inside the open sector."""
        return self.theta + THETA_MARGIN


def _rotated_max_eigvec(op, alpha):
    """Eigenvector for the largest eigenvalue of the Hermitian part of ``e^{i alpha} L`` (banded)."""
    rot = np.exp(1j * alpha)
    b = max(op.lower, op.upper)
    M = op.M
    # upper Hermitian band storage: a_band[b + i - j, j] = H[i, j], i <= j
    a_band = np.zeros((b + 1, M), dtype=complex)
    for d in range(0, b + 1):
        if d >= M:
            break
        Hd = 0.5 * (rot * op.diagonal(d) + np.conj(rot * op.diagonal(-d)))
        if d == 0:
            Hd = Hd.real.astype(complex)
        a_band[b - d, d:] = Hd
    if b == 0:
        j = int(np.argmax(a_band[0].real))
        x = np.zeros(M, dtype=complex)
        x[j] = 1.0
        return x
    _, vecs = sla.eig_banded(a_band, lower=False, select="i", select_range=(M - 1, M - 1))
    return vecs[:, 0]


def _rotated_max_eigvec_dense(A, alpha):
    B = np.exp(1j * alpha) * A
    Hh = 0.5 * (B + B.conj().T)
    hermitian_eigen_extremes(Hh)
    _, vecs = sla.eigh(Hh, subset_by_index=(A.shape[0] - 1, A.shape[0] - 1))
    return vecs[:, 0]


def field_of_values_boundary(A, n_angles=256):
    """Sample the boundary of ``F(A)`` by the rotation method.

    For each angle ``alpha`` on a uniform grid the top eigenvector ``x`` of the
    Hermitian part of ``e^{i alpha} A`` gives the boundary point ``x^H A x``.
    ``A`` may be a dense matrix (dimension <= 500) or a banded
    :class:`SectorialOperator` of any size.
    """
    if n_angles < 8:
        raise ValueError("n_angles must be >= 8")
    alphas = 2.0 * np.pi * np.arange(n_angles) / n_angles
    if isinstance(A, SectorialOperator):
        apply, vec = A.apply, lambda a: _rotated_max_eigvec(A, a)
    else:
        A = as_dense(A, square=True)
        if A.shape[0] > DENSE_LIMIT:
            raise ValueError(f"dense field of values limited to dimension {DENSE_LIMIT}")
        apply, vec = (lambda x: A @ x), lambda a: _rotated_max_eigvec_dense(A, a)
    pts = np.empty(n_angles, dtype=complex)
    for i, a in enumerate(alphas):
        x = vec(a)
        pts[i] = np.vdot(x, apply(x)) / np.vdot(x, x)
    return pts


def sector_semiangle(points):
    """Smallest ``theta`` with every point in ``{|arg(-p)| <= theta}``."""
    points = np.asarray(points, dtype=complex)
    scale = np.max(np.abs(points), initial=0.0)
    if np.any(points.real >= -1e-12 * scale):
        raise NotSectorial("field of values touches the closed right half-plane")
    return float(np.max(np.arctan(np.abs(points.imag) / -points.real)))


def sector_info(A, n_angles=256, with_radius=False):
    pts = field_of_values_boundary(A, n_angles)
    theta = sector_semiangle(pts)
    radius = float(np.max(np.abs(pts))) if with_radius else None
    return SectorInfo(theta, radius, pts)


def chi(lam, delta):
    """``(1 - delta lam)^{-1}``; maps ``S_theta`` onto ``G_theta``."""
    return 1.0 / (1.0 - delta * np.asarray(lam))


def in_g_theta(w, delta, theta, slack=1e-8):
    """True where ``w`` lies in ``G_theta``, i.e. ``(1 - 1/w)/delta`` lies in ``S_theta``."""
    w = np.asarray(w, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = (1.0 - 1.0 / w) / delta
    ok = np.abs(np.angle(-lam)) <= theta + slack
    return ok | (np.abs(lam) <= slack)


def verify_fz_in_gtheta(A, delta, theta, n_samples=256):
    """Check numerically that ``F((I - delta A)^{-1})`` lies in ``G_theta``."""
    A = A.to_dense() if isinstance(A, SectorialOperator) else as_dense(A, square=True)
    if A.shape[0] > 200:
        raise ValueError("verify_fz_in_gtheta is limited to dimension 200")
    Z = inv(np.eye(A.shape[0]) - delta * A)
    pts = field_of_values_boundary(Z, n_samples)
    return bool(np.all(in_g_theta(pts, delta, theta)))


def g_theta_boundary(delta, theta, n=400, r_max=1e8):
    """Samples of the two circular arcs bounding ``G_theta``."""
    r = np.concatenate([[0.0], np.geomspace(1e-8, r_max, n)])
    upper = chi(-r * np.exp(-1j * theta), delta)
    lower = chi(-r * np.exp(1j * theta), delta)
    return np.concatenate([upper, lower[::-1]])
