"""Error bounds for the rational Arnoldi phi-function iterates.

A-posteriori bounds need only the sector semiangle ``theta`` containing
``F(L)``, ``tau = h/delta`` and the running product of Arnoldi subdiagonals.
Everything is assembled in log space and returned as ``inf`` on overflow.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ThetaOutOfRange
from .laguerre import laguerre, log_abs_laguerre_sequence

CROUZEIX_K = 11.08
THETA_STAR = 0.48124


def _exp(logval):
    if logval == -math.inf:
        return 0.0
    try:
        return math.exp(logval)
    except OverflowError:
        return math.inf


def _log_fact_ratio(m, k):
    """``log((m-1)! / (m+k)!)``."""
    return math.lgamma(m) - math.lgamma(m + k + 1)


def c_coeff(j, theta):
    return (1.0 + math.sqrt(2.0 * (1.0 - math.cos(theta)))) ** j


def _log_c_coeff(j, theta):
    return j * math.log1p(math.sqrt(2.0 * (1.0 - math.cos(theta))))


def ckm(k, m, tau, theta):
    """``(m-1)!/(m+k)! * sum_{j<m} |L_{m-1-j}^(k)(tau)| c_j(theta)``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    total = sum(abs(laguerre(m - 1 - j, k, tau)) * c_coeff(j, theta) for j in range(m))
    return _exp(_log_fact_ratio(m, k) + math.log(total))


def ckm_prime(k, m, theta):
    """``(m-1)!/(m+k)! * sum_{j<m} C(m+k-j-1, k) c_j(theta)``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    total = sum(math.comb(m + k - j - 1, k) * c_coeff(j, theta) for j in range(m))
    return _exp(_log_fact_ratio(m, k) + math.log(total))


def _log_ckm(k, m, tau, theta):
    log_lag = log_abs_laguerre_sequence(m - 1, k, tau)
    terms = [float(log_lag[m - 1 - j]) + _log_c_coeff(j, theta) for j in range(m)]
    return _log_fact_ratio(m, k) + _logsumexp(terms)


def _log_ckm_prime(k, m, theta):
    terms = [math.log(math.comb(m + k - j - 1, k)) + _log_c_coeff(j, theta) for j in range(m)]
    return _log_fact_ratio(m, k) + _logsumexp(terms)


def _logsumexp(terms):
    top = max(terms)
    if top == -math.inf:
        return -math.inf
    return top + math.log(sum(math.exp(t - top) for t in terms))


@dataclass(frozen=True)
class BoundInputs:
    """Quantities entering the a-posteriori bounds at one Krylov dimension."""

    k: int
    m: int
    tau: float
    theta: float
    subdiag_product: float
    K: float = CROUZEIX_K
    hR: float | None = None

    def __post_init__(self):
        if not 1.0 <= self.K <= CROUZEIX_K:
            raise ValueError(f"Crouzeix constant must lie in [1, {CROUZEIX_K}]")
        if self.m < 1 or self.k < 0:
            raise ValueError("need m >= 1 and k >= 0")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.subdiag_product < 0:
            raise ValueError("subdiagonal product must be nonnegative")

    @classmethod
    def symmetric(cls, k, m, tau, subdiag_product, **kw):
        return cls(k, m, tau, 0.0, subdiag_product, K=1.0, **kw)


def _log_common(inp):
    """Shared log of ``K (2(p+1)/(2cos(theta)-1))^{p+1} e^{-p-1} / tau^p * prod h`` with ``p = m+k``."""
    if not 0.0 <= inp.theta < math.pi / 3:
        raise ThetaOutOfRange(f"theta={inp.theta:.4f} must lie in [0, pi/3)")
    p = inp.m + inp.k
    log_prod = math.log(inp.subdiag_product) if inp.subdiag_product > 0 else -math.inf
    return (
        math.log(inp.K)
        - (p + 1)
        - p * math.log(inp.tau)
        + (p + 1) * math.log(2.0 * (p + 1) / (2.0 * math.cos(inp.theta) - 1.0))
        + log_prod
    )


def bound_aposteriori(inp):
    """Return the sharper Laguerre bound and the coarser binomial bound, ``(fe1, fe2)``."""
    base = _log_common(inp)
    if base == -math.inf:
        return 0.0, 0.0
    cos = math.cos(inp.theta)
    log_fe1 = base + inp.tau * (cos - 0.5) + _log_ckm(inp.k, inp.m, inp.tau, inp.theta)
    log_fe2 = base + inp.tau * cos + _log_ckm_prime(inp.k, inp.m, inp.theta)
    return _exp(log_fe1), _exp(log_fe2)


def log_bound_fe2(k, m, tau, theta, log_subdiag_product, K=CROUZEIX_K):
    """``log`` of the binomial bound with the subdiagonal product supplied in log form."""
    inp = BoundInputs(k, m, tau, theta, 1.0, K=K)
    return _log_common(inp) + tau * math.cos(theta) + _log_ckm_prime(k, m, theta) + log_subdiag_product


def bound_exponential(m, tau, theta, subdiag_product, K=CROUZEIX_K):
    """The ``k = 0`` bound written with ``(1/m) sum_j c_j(theta)``."""
    if not 0.0 <= theta < math.pi / 3:
        raise ThetaOutOfRange(f"theta={theta:.4f} must lie in [0, pi/3)")
    if subdiag_product == 0:
        return 0.0
    cos = math.cos(theta)
    csum = sum(c_coeff(j, theta) for j in range(m))
    logval = (
        math.log(K)
        + tau * cos
        - m
        - 1
        - math.log(m)
        - m * math.log(tau)
        + (m + 1) * math.log(2.0 * (m + 1) / (2.0 * cos - 1.0))
        + math.log(csum)
        + math.log(subdiag_product)
    )
    return _exp(logval)


def bound_selfadjoint(k, m, tau, subdiag_product, K=1.0):
    """``theta = 0`` form: ``K e^{tau-p-1}/tau^p (2(p+1))^{p+1}/(k+1)! prod h``."""
    if subdiag_product == 0:
        return 0.0
    p = m + k
    logval = (
        math.log(K)
        + tau
        - p
        - 1
        - p * math.log(tau)
        + (p + 1) * math.log(2.0 * (p + 1))
        - math.lgamma(k + 2)
        + math.log(subdiag_product)
    )
    return _exp(logval)


def _bdn_maximand(s, k, m, tau, theta):
    s = np.asarray(s, dtype=float)
    lag = np.abs(laguerre(m - 1, k + 1, tau + s * np.exp(1j * theta)))
    return np.exp(-s * math.cos(theta)) * (1.0 + s / tau) ** (m + k + 1) * lag


def bounded_sector_max(k, m, tau, theta, hR, n_grid=512):
    """``max_{0<=s<=hR} |e^{-s cos theta} (1+s/tau)^{m+k+1} L_{m-1}^{(k+1)}(tau + s e^{i theta})|``.

    Uniform grid, then golden-section refinement in the best cell.
    """
    if hR <= 0:
        return float(_bdn_maximand(0.0, k, m, tau, theta))
    s = np.linspace(0.0, hR, n_grid)
    vals = _bdn_maximand(s, k, m, tau, theta)
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = s[max(i - 1, 0)], s[min(i + 1, n_grid - 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda x: -float(_bdn_maximand(x, k, m, tau, theta)),
            bracket=None,
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-6 * max(hR, 1e-300)},
        )
        best = max(best, -float(res.fun))
    return best


def bound_bounded_sector(inp, n_grid=512):
    """Bound for ``F(L)`` inside the sector intersected with the disk of radius R (``inp.hR = h R``)."""
    if inp.hR is None:
        raise ValueError("bounded-sector bound needs hR")
    if inp.subdiag_product == 0:
        return 0.0
    peak = bounded_sector_max(inp.k, inp.m, inp.tau, inp.theta, inp.hR, n_grid)
    logval = (
        math.log(inp.K)
        + math.log(peak)
        + math.log(inp.tau)
        + _log_fact_ratio(inp.m, inp.k)
        + math.log(inp.subdiag_product)
    )
    return _exp(logval)


def rho(theta):
    """Asymptotic a-priori convergence factor; below 1 for ``theta < THETA_STAR``."""
    cos = math.cos(theta)
    return (
        (1.0 + math.sqrt(2.0 * (1.0 - cos))) * cos / (4.0 * cos - 2.0) * math.pi / (math.pi - theta)
    )


def bound_apriori(k, m, theta, K=CROUZEIX_K):
    """``11 K rho(theta)^m`` for ``tau = (m+k)/cos(theta)``."""
    if not 0.0 <= theta < THETA_STAR:
        raise ThetaOutOfRange(f"theta={theta:.5f} must lie in [0, {THETA_STAR})")
    return 11.0 * K * rho(theta) ** m


def bound_apriori_k(k, m, theta, K=CROUZEIX_K):
    """k-dependent a-priori bound ``K e^{-k}/(k! cos) (cos/(2cos-1))^{k+1} 2^{k+3} rho^m``."""
    if not 0.0 <= theta < THETA_STAR:
        raise ThetaOutOfRange(f"theta={theta:.5f} must lie in [0, {THETA_STAR})")
    cos = math.cos(theta)
    return (
        K
        * math.exp(-k)
        / (math.factorial(k) * cos)
        * (cos / (2 * cos - 1)) ** (k + 1)
        * 2.0 ** (k + 3)
        * rho(theta) ** m
    )


def bound_apriori_symmetric(k, m):
    """Self-adjoint case: ``(8/k!) (2/e)^k (1/2)^m``."""
    return 8.0 / math.factorial(k) * (2.0 / math.e) ** k * 0.5**m


def capacity(theta):
    """Logarithmic capacity ``1/(2(2-nu))`` of the image region, ``nu = 2 theta/pi``."""
    nu = 2.0 * theta / math.pi
    return 1.0 / (2.0 * (2.0 - nu))


def capacity_bound(m, theta):
    """``prod h_{i+1,i} <= 2 capacity^m``."""
    return 2.0 * capacity(theta) ** m


def bound_superlinear(m, singular_values, p=1.0):
    """``(eta e p / m)^{m/p}`` with ``eta = (1+p)/p * sum sigma_j^p``."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    sigma = np.asarray(singular_values, dtype=float)
    eta = (1.0 + p) / p * float(np.sum(sigma**p))
    return (eta * math.e * p / m) ** (m / p)


def trace_class_sum_bound(delta):
    """Upper bound ``1/(2 sqrt(delta))`` for ``sum_j 1/(1 + delta (j pi)^2)``."""
    return 0.5 / math.sqrt(delta)


def bound_elliptic(m, delta, C=math.e):
    """``(C / (sqrt(delta) m))^m``; ``C = e`` for the 1-D diffusion model problem."""
    return (C / (math.sqrt(delta) * m)) ** m


def _taylor_coefficients(k, tau, z0, order):
    """Taylor coefficients ``a_0..a_order`` of ``e^tau e^{-tau/z} z^k`` about ``z0``."""
    z0 = complex(z0)
    # -tau/z = -tau/z0 * sum_j (-t/z0)^j
    u = np.array([-tau / z0 * (-1.0 / z0) ** j for j in range(order + 1)], dtype=complex)
    ex = np.zeros(order + 1, dtype=complex)
    ex[0] = np.exp(tau + u[0])
    jj = np.arange(1, order + 1)
    for n in range(1, order + 1):
        ex[n] = np.sum(jj[:n] * u[1 : n + 1] * ex[n - 1 :: -1][:n]) / n
    poly = np.array([math.comb(k, i) * z0 ** (k - i) for i in range(k + 1)], dtype=complex)
    return np.convolve(ex, poly)[: order + 1]


def derivative_identity_check(k, m, tau, z):
    """Both sides of the Laguerre form of ``d^{m+k}/dz^{m+k} [f_0(z) z^k] / (tau^k (m+k)!)``.

    ``f_0(z) = exp(tau - tau/z)``. The left side comes from exact Taylor
    coefficient recursion; the right side from the Laguerre closed form.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    z = complex(z)
    if z == 0:
        raise ValueError("z must be nonzero")
    lhs = _taylor_coefficients(k, tau, z, m + k)[m + k] / tau**k
    f0 = np.exp(tau - tau / z)
    rhs = (
        (-1) ** (m + 1)
        * tau
        / z ** (m + k + 1)
        * f0
        * math.exp(_log_fact_ratio(m, k))
        * laguerre(m - 1, k + 1, tau / z)
    )
    return complex(lhs), complex(rhs)


@dataclass
class BoundReport:
    """Per-iteration record of a rational Arnoldi run."""

    m: list = field(default_factory=list)
    subdiag_product: list = field(default_factory=list)
    bound_fe1: list = field(default_factory=list)
    bound_fe2: list = field(default_factory=list)
    bound_bdn: list = field(default_factory=list)
    residual_estimate: list = field(default_factory=list)
    true_error: list = field(default_factory=list)

    def append(self, m, subdiag_product, residual, fe1=None, fe2=None, bdn=None, true_error=None):
        self.m.append(m)
        self.subdiag_product.append(subdiag_product)
        self.residual_estimate.append(residual)
        self.bound_fe1.append(fe1)
        self.bound_fe2.append(fe2)
        self.bound_bdn.append(bdn)
        self.true_error.append(true_error)

    def __len__(self):
        return len(self.m)

    def column(self, name):
        return np.array([np.nan if x is None else x for x in getattr(self, name)], dtype=float)

    def rows(self, columns):
        return [[getattr(self, c)[i] for c in columns] for i in range(len(self))]
