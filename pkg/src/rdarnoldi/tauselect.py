"""Choice of ``tau = h/delta``: optimal formulas, coarse-grid calibration,
robustness windows and the factorization-reuse test."""

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .bounds import capacity, log_bound_fe2
from .errors import MaxIterations, NoConvergence
from .phifun import PhiRequest, phi_oracle_dense
from .residual import StoppingRule
from .sector import sector_info
from .solver import rd_arnoldi_phi


def tau_optimal(m, k, theta):
    """Minimizer of the binomial a-posteriori bound in ``tau``: ``(m+k)/cos(theta)``."""
    return (m + k) / math.cos(theta)


def tau_optimal_revised(m, k, theta):
    """Optimum when the subdiagonal product decays like ``(C sqrt(tau/h)/m)^m``."""
    return (m + 2 * k) / (2.0 * math.cos(theta))


def tau_bounded_sector(m, k, h, R):
    return math.sqrt(2.0 * h * R * (m + k + 1))


class TauWindow(NamedTuple):
    lo: float
    hi: float


@dataclass(frozen=True)
class TauPolicy:
    """Calibrated ``tau`` and its window of admissible values."""

    theta: float
    k: int
    target_m: int
    tau_opt: float
    window: TauWindow | None = None

    def __post_init__(self):
        if self.window is not None and not self.window.lo < self.tau_opt < self.window.hi:
            raise ValueError("tau_opt must lie strictly inside the window")

    @property
    def bounds(self):
        """Computed window, or the indicative ``[tau_opt/2, 2 tau_opt]``."""
        if self.window is not None:
            return self.window
        return TauWindow(self.tau_opt / 2.0, 2.0 * self.tau_opt)


def window_equation(tau, m, n, k=0, theta=0.0):
    """Log of (bound after ``n`` steps at ``tau``) / (bound after ``m`` steps at ``tau_opt``).

    Both bounds use the binomial form with every subdiagonal replaced by the
    capacity ``1/(2(2-nu))`` (``1/4`` for ``theta = 0``). Zero at the window edges.
    """
    log_gamma = math.log(capacity(theta))
    t_opt = tau_optimal(m, k, theta)
    lhs = log_bound_fe2(k, n, tau, theta, n * log_gamma, K=1.0)
    rhs = log_bound_fe2(k, m, t_opt, theta, m * log_gamma, K=1.0)
    return lhs - rhs


def window_residual(tau, m, n, k=0, theta=0.0):
    """Relative residual ``|lhs/rhs - 1|`` of the window equation at ``tau``."""
    return abs(math.expm1(window_equation(tau, m, n, k, theta)))


def window_roots(m, n, k=0, theta=0.0):
    """Roots of the window equation for exactly ``n`` steps, or ``None`` when it has no sign change."""
    t_opt = tau_optimal(m, k, theta)
    g = lambda t: window_equation(t, m, n, k, theta)
    if g(t_opt) >= 0:
        return None
    lo_a, hi_b = t_opt / 10.0, 10.0 * t_opt
    if g(lo_a) <= 0 or g(hi_b) <= 0:
        return None
    lo = brentq(g, lo_a, t_opt, xtol=1e-14, rtol=1e-15)
    hi = brentq(g, t_opt, hi_b, xtol=1e-14, rtol=1e-15)
    return lo, hi


def tau_window(m, k=0, theta=0.0, extra=1, with_steps=False):
    """``tau`` interval in which at most ``m + extra`` steps reach the accuracy that
    ``tau_opt`` reaches in ``m`` steps.

    The interval is the union over ``n = m+1 .. m+extra`` of the sets where the
    ``n``-step bound does not exceed the ``m``-step optimum. Each edge is a root
    of :func:`window_equation` for one ``n``; ``with_steps=True`` also returns
    those ``n``. Without a sign change a warning is issued and the degenerate
    window ``(tau_opt, tau_opt)`` returned.
    """
    if extra not in (1, 2):
        raise ValueError("extra must be 1 or 2")
    t_opt = tau_optimal(m, k, theta)
    best_lo, best_hi = (t_opt, m), (t_opt, m)
    for n in range(m + 1, m + extra + 1):
        roots = window_roots(m, n, k, theta)
        if roots is None:
            continue
        if roots[0] < best_lo[0]:
            best_lo = (roots[0], n)
        if roots[1] > best_hi[0]:
            best_hi = (roots[1], n)
    if best_lo[0] == t_opt and best_hi[0] == t_opt:
        warnings.warn(f"no bracket for the tau window at m={m}; returning a degenerate window")
    win = TauWindow(best_lo[0], best_hi[0])
    return (win, (best_lo[1], best_hi[1])) if with_steps else win


def reuse_decision(policy, h_new, delta_old):
    """Keep the factorization of ``I - delta_old L`` for the new step ``h_new``?"""
    if not (h_new > 0 and delta_old > 0):
        raise ValueError("h_new and delta_old must be positive")
    lo, hi = policy.bounds
    return lo <= h_new / delta_old <= hi


def iterations_to_tol(op, k, h, tau, v, tol, reference, max_m=None):
    """Number of rational Arnoldi steps until the true error drops to ``tol`` (None if never)."""
    req = PhiRequest(k, h, v, tau)
    stop = StoppingRule(tol, max_m or op.M, "oracle", check_every=1)
    try:
        return rd_arnoldi_phi(req, op, stop, reference=reference).m
    except MaxIterations:
        return None


def calibrate_on_coarse(
    op_factory,
    M_coarse=50,
    k=1,
    h=0.1,
    theta=None,
    tol=1e-12,
    use_residual=False,
    extra=2,
):
    """Find the smallest ``m`` such that ``tau = (m+k)/cos(theta)`` converges in ``m`` steps.

    Runs on a coarse discretization ``op_factory(M_coarse)`` with the dense
    oracle for stopping (or the generalized residual when ``use_residual``).
    """
    op = op_factory(M_coarse)
    if theta is None:
        theta = 0.0 if op.is_symmetric() else sector_info(op).theta
    v = np.ones(op.M) / math.sqrt(op.M)
    reference = None if use_residual else phi_oracle_dense(k, h, op.to_dense(), v)
    for m in range(1, op.M + 1):
        tau = tau_optimal(m, k, theta)
        req = PhiRequest(k, h, v, tau)
        if use_residual:
            try:
                res = rd_arnoldi_phi(req, op, StoppingRule(tol, m, "residual", check_every=1))
            except MaxIterations as exc:
                res = exc.approximation
            hit = res.breakdown or min(res.report.residual_estimate) <= tol
        else:
            try:
                rd_arnoldi_phi(req, op, StoppingRule(tol, m, "oracle", check_every=1), reference=reference)
                hit = True
            except MaxIterations:
                hit = False
        if hit:
            window = None
            if m >= 2 and theta < math.pi / 3:
                # an empty window is a legitimate outcome for wide sectors
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    window = tau_window(m, k, theta, extra)
            if window is not None and not window.lo < tau < window.hi:
                window = None
            return TauPolicy(theta, k, m, tau, window)
    raise NoConvergence(f"no m <= {op.M} converged on the coarse grid")
