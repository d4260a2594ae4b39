"""Generalized residual and stopping rules."""

from dataclasses import dataclass

import numpy as np

MODES = ("residual", "bound_fe1", "bound_fe2", "oracle")


@dataclass(frozen=True)
class StoppingRule:
    """When to stop the rational Arnoldi iteration.

    ``tolerance`` is relative to ``||v||``. In ``residual`` mode the test must
    hold at two consecutive checked iterations because the residual tends to
    underestimate the error early on. Evaluating ``f_k(H_m)`` dominates the
    cost of a step, so by default it is done every second iteration (and
    always at breakdown and at ``max_m``).
    """

    tolerance: float = 1e-12
    max_m: int = 100
    mode: str = "residual"
    check_every: int = 2

    def __post_init__(self):
        if not self.tolerance >= 1e-15:
            raise ValueError("tolerance must be >= 1e-15")
        if self.max_m < 1:
            raise ValueError("max_m must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.check_every < 1:
            raise ValueError("check_every must be positive")


def residual_from_f(h_next, f):
    """``h_{m+1,m} |e_m^T f_k(H_m) e_1|`` given ``f = f_k(H_m) e_1``."""
    return float(h_next * abs(f[-1]))


def generalized_residual(dec, req, f=None):
    """Generalized residual of the current iterate of ``dec``."""
    if dec.m < 1:
        raise ValueError("need at least one Arnoldi step")
    if dec.breakdown:
        return 0.0
    if f is None:
        from .phifun import fk_on_hessenberg

        f = fk_on_hessenberg(req, dec.H)
    return residual_from_f(dec.h_next, f)


_COLUMN = {
    "residual": "residual_estimate",
    "bound_fe1": "bound_fe1",
    "bound_fe2": "bound_fe2",
    "oracle": "true_error",
}


def should_stop(rule, report, scale=1.0):
    """Apply ``rule`` to the latest entries of a :class:`BoundReport` (or a plain history list).

    ``scale`` multiplies the tolerance, typically ``||v||``.
    """
    history = report if isinstance(report, (list, tuple, np.ndarray)) else getattr(report, _COLUMN[rule.mode])
    tol = rule.tolerance * scale
    if not len(history) or history[-1] is None:
        return False
    if rule.mode == "residual":
        return len(history) >= 2 and history[-2] is not None and max(history[-2:]) <= tol
    return history[-1] <= tol
