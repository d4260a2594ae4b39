"""Driver for ``phi_k(h L) v`` by the restricted-denominator rational Arnoldi method."""

import math

import numpy as np

from .arnoldi import arnoldi_init
from .bounds import CROUZEIX_K, BoundInputs, BoundReport, bound_aposteriori, bound_bounded_sector
from .errors import MaxIterations, ZeroVector
from .operators import factor_shift
from .phifun import PhiApproximation, fk_on_hessenberg
from .residual import StoppingRule, residual_from_f, should_stop


def rd_arnoldi_phi(req, op, stop=None, *, fact=None, theta=None, K=CROUZEIX_K, reference=None, hR=None):
    """Approximate ``phi_k(h L) v`` in the Krylov space of ``Z = (I - delta L)^{-1}``.

    Parameters
    ----------
    req : PhiRequest
    op : SectorialOperator
    stop : StoppingRule, optional
    fact : ShiftedFactorization, optional
        Reused when given; must have been built with ``req.delta``.
    theta : float, optional
        Sector semiangle fed to the a-posteriori bounds (include any safety
        margin before passing it). Bounds are skipped when omitted or when
        ``theta >= pi/3``.
    K : float
        Crouzeix constant; 1 for symmetric ``L``.
    reference : ndarray, optional
        Exact ``phi_k(h L) v``; fills the ``true_error`` column.
    hR : float, optional
        ``h * R`` for the bounded-sector bound.

    Returns
    -------
    PhiApproximation

    Raises
    ------
    MaxIterations
        If ``stop.max_m`` is reached first; the iterate is attached.
    """
    stop = stop or StoppingRule()
    if stop.mode in ("bound_fe1", "bound_fe2") and theta is None:
        raise ValueError(f"stopping mode {stop.mode!r} needs theta")
    if stop.mode == "oracle" and reference is None:
        raise ValueError("oracle stopping needs a reference solution")
    if fact is None:
        fact = factor_shift(op, req.delta)
    elif not math.isclose(fact.delta, req.delta, rel_tol=1e-14):
        raise ValueError("factorization delta does not match h/tau")

    v = np.asarray(req.v)
    vnorm = float(np.linalg.norm(v))
    if vnorm < 1e-300:
        raise ZeroVector("v is zero; phi_k(hL) v = 0 trivially")
    dec = arnoldi_init(fact, v / vnorm)
    use_bounds = theta is not None and 0.0 <= theta < math.pi / 3
    max_m = min(stop.max_m, op.M)
    report = BoundReport()
    y = None

    while True:
        dec.extend()
        m = dec.m
        if not (m % stop.check_every == 0 or dec.breakdown or m == max_m):
            continue
        f = fk_on_hessenberg(req, dec.H)
        y = vnorm * (dec.V @ f)
        if v.dtype.kind != "c" and np.iscomplexobj(y):
            y = y.real
        prod = dec.subdiag_product
        res = 0.0 if dec.breakdown else vnorm * residual_from_f(dec.h_next, f)
        fe1 = fe2 = bdn = None
        if use_bounds:
            inp = BoundInputs(req.k, m, req.tau, theta, prod, K=K, hR=hR)
            fe1, fe2 = bound_aposteriori(inp)
            fe1, fe2 = vnorm * fe1, vnorm * fe2
            if hR is not None:
                bdn = vnorm * bound_bounded_sector(inp)
        err = None if reference is None else float(np.linalg.norm(reference - y))
        report.append(m, prod, res, fe1, fe2, bdn, err)

        if dec.breakdown:
            return PhiApproximation(y, m, report, breakdown=True, converged=True)
        if should_stop(stop, report, scale=vnorm):
            return PhiApproximation(y, m, report, converged=True)
        if m >= max_m:
            raise MaxIterations(
                f"tolerance {stop.tolerance:g} not met within {max_m} iterations",
                PhiApproximation(y, m, report),
            )
