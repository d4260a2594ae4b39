"""Acceptance criteria, one test each.

Every test records its outcome before asserting, so the terminal summary
prints one PASS/FAIL line per criterion even when a test fails.
"""

import math
import time

import numpy as np
import pytest
import scipy.linalg as sla
from scipy.special import binom, gamma

from oracles import exact_advdiff_phi
from rdarnoldi.arnoldi import arnoldi_init
from rdarnoldi.bounds import CROUZEIX_K
from rdarnoldi.errors import MaxIterations
from rdarnoldi.laguerre import laguerre
from rdarnoldi.operators import factor_shift, make_advection_diffusion
from rdarnoldi.phifun import PhiRequest, phi_oracle_dense
from rdarnoldi.residual import StoppingRule
from rdarnoldi.sector import sector_info
from rdarnoldi.solver import rd_arnoldi_phi
from rdarnoldi.tauselect import calibrate_on_coarse, iterations_to_tol, tau_optimal, tau_window, window_residual

TOL = 1e-12


def unit_ones(M):
    return np.ones(M) / math.sqrt(M)


def advdiff(c):
    return lambda M: make_advection_diffusion(M, c)


def coarse_theta(c):
    return 0.0 if c == 0 else sector_info(make_advection_diffusion(50, c)).theta


@pytest.fixture(scope="module")
def coarse_runs():
    """Every calibrated M=50 run, with bounds and oracle error at each step."""
    t0 = time.perf_counter()
    runs = []
    for c in (0.0, 2.0, 4.0):
        op = make_advection_diffusion(50, c)
        L = op.to_dense()
        v = unit_ones(50)
        sym = op.is_symmetric()
        theta = coarse_theta(c)
        for h in (0.05, 0.5):
            for k in (0, 1, 2):
                pol = calibrate_on_coarse(advdiff(c), 50, k, h, theta=theta)
                ref = phi_oracle_dense(k, h, L, v)
                res = rd_arnoldi_phi(
                    PhiRequest(k, h, v, pol.tau_opt),
                    op,
                    StoppingRule(TOL, 50, "residual", check_every=1),
                    theta=theta if sym else theta + 0.01,
                    K=1.0 if sym else CROUZEIX_K,
                    reference=ref,
                )
                runs.append(dict(c=c, h=h, k=k, theta=theta, res=res, ref=ref, v=v))
    return runs, time.perf_counter() - t0


def test_criterion_01_oracle_equivalence(coarse_runs, record_criterion):
    runs, elapsed = coarse_runs
    errs = [np.max(np.abs(r["res"].y - r["ref"])) for r in runs]
    # second route: the closed-form extended-precision solution
    errs_exact = [
        np.max(np.abs(r["res"].y - exact_advdiff_phi(50, r["c"], r["h"], r["k"], r["v"]))) for r in runs
    ]
    worst = max(max(errs), max(errs_exact))
    ok = worst <= 1e-10 and elapsed < 10.0 and len(runs) == 18
    record_criterion(1, "oracle equivalence", ok, f"worst={worst:.1e} runs={len(runs)} time={elapsed:.1f}s")
    assert ok


def test_criterion_02_bound_validity(coarse_runs, record_criterion):
    runs, _ = coarse_runs
    checked = violations = 0
    for r in runs:
        if r["theta"] >= math.pi / 3:
            continue
        rep = r["res"].report
        for err, fe1, fe2 in zip(rep.true_error, rep.bound_fe1, rep.bound_fe2):
            if err < 1e-13:
                break
            checked += 1
            violations += (fe1 < err) + (fe2 < err)
    ok = violations == 0 and checked > 0
    record_criterion(2, "bound validity", ok, f"violations={violations} checked={checked}")
    assert ok


def test_criterion_03_sector_angles(record_criterion):
    t0 = time.perf_counter()
    theta_50 = {c: sector_info(make_advection_diffusion(50, c)).theta for c in (2.0, 4.0)}
    t_coarse = time.perf_counter() - t0
    t0 = time.perf_counter()
    theta_1000 = {c: sector_info(make_advection_diffusion(1000, c)).theta for c in (2.0, 4.0)}
    t_fine = time.perf_counter() - t0
    published = {2.0: 0.201, 4.0: 0.425}
    match = all(abs(theta_1000[c] - published[c]) <= 0.02 for c in published)
    mesh = all(abs(theta_1000[c] - theta_50[c]) <= 0.02 for c in published)
    ok = match and mesh and t_fine < 60.0 and t_coarse < 1.0
    detail = (
        f"theta(1000)={theta_1000[2.0]:.4f},{theta_1000[4.0]:.4f} vs 0.201,0.425; "
        f"mesh diff={max(abs(theta_1000[c] - theta_50[c]) for c in published):.1e}; "
        f"time={t_fine:.1f}s/{t_coarse:.2f}s"
    )
    record_criterion(3, "sector angles", ok, detail)
    assert mesh, "mesh independence"
    assert match, detail


@pytest.fixture(scope="module")
def calibrated():
    return calibrate_on_coarse(advdiff(2.0), 50, k=1, h=0.1, tol=TOL)


def test_criterion_04_calibration(calibrated, record_criterion):
    pol = calibrated
    ref_tau = 15 / math.cos(pol.theta)
    ok = 12 <= pol.target_m <= 16 and abs(pol.tau_opt / ref_tau - 1) <= 0.15
    record_criterion(4, "calibration", ok, f"target_m={pol.target_m} tau={pol.tau_opt:.4f} (15/cos={ref_tau:.4f})")
    assert ok


def test_criterion_05_tau_robustness(calibrated, record_criterion):
    pol = calibrated
    M = 200
    op = make_advection_diffusion(M, 2.0)
    v = unit_ones(M)
    ref = exact_advdiff_phi(M, 2.0, 0.1, 1, v)
    n = {f: iterations_to_tol(op, 1, 0.1, f * pol.tau_opt, v, TOL, ref) for f in (1.0, 0.5, 2.0)}
    limit = pol.target_m + 3
    ok = (
        all(x is not None for x in n.values())
        and n[0.5] <= limit
        and n[2.0] <= limit
        and n[0.5] <= n[1.0] + 1
    )
    record_criterion(5, "tau robustness", ok, f"iterations tau*={n[1.0]} tau*/2={n[0.5]} 2tau*={n[2.0]} limit={limit}")
    assert ok


def test_criterion_06_step_dependence(record_criterion):
    M = 200
    v = unit_ones(M)
    rows, ok = [], True
    for c in (0.0, 2.0, 4.0):
        op = make_advection_diffusion(M, c)
        theta = coarse_theta(c)
        for k in (0, 1, 2):
            counts = {}
            for h, fixed in ((0.05, 15.0), (0.5, 8.0)):
                ref = exact_advdiff_phi(M, c, h, k, v)
                calib = calibrate_on_coarse(advdiff(c), 50, k, h, theta=theta, tol=TOL).tau_opt
                counts[h] = [iterations_to_tol(op, k, h, t, v, TOL, ref) for t in (fixed / math.cos(theta), calib)]
            for small, large in zip(counts[0.05], counts[0.5]):
                ok &= small is not None and large is not None and small > large
            rows.append(f"c={c:g},k={k}:{counts[0.05][0]}>{counts[0.5][0]}")
    record_criterion(6, "h-dependence", ok, " ".join(rows))
    assert ok


def test_criterion_07_apriori_rate(record_criterion):
    M = 100
    op = make_advection_diffusion(M, 0.0)
    v = unit_ones(M)
    worst = 0.0
    for h in (0.1, 0.5):
        for k in (0, 1, 2):
            ref = exact_advdiff_phi(M, 0.0, h, k, v)
            for m in range(1, 26):
                try:
                    res = rd_arnoldi_phi(PhiRequest(k, h, v, m + k), op, StoppingRule(1e-15, m, "oracle"), reference=ref)
                except MaxIterations as exc:
                    res = exc.approximation
                bound = 8 / math.factorial(k) * (2 / math.e) ** k * 0.5**m
                worst = max(worst, res.report.true_error[-1] / bound)
    ok = worst <= 1.0
    record_criterion(7, "a-priori rate", ok, f"max error/bound={worst:.2f}")
    assert ok


def test_criterion_08_laguerre_identities(record_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)

    def disk(radius):
        return radius * math.sqrt(rng.uniform()) * np.exp(1j * rng.uniform(0, 2 * math.pi))

    fails = {"L1": 0, "L2": 0, "L3": 0, "ede": 0}
    guarded = 0
    for _ in range(200):
        n = int(rng.integers(0, 11))
        a, b = rng.uniform(0, 3, 2)
        z1, z2 = disk(5), disk(5)
        lhs = laguerre(n, a + b + 1, z1 + z2)
        terms = [laguerre(j, a, z1) * laguerre(n - j, b, z2) for j in range(n + 1)]
        fails["L1"] += abs(lhs - sum(terms)) > 1e-9 * max(abs(lhs), 1e-3 * sum(map(abs, terms)))

        lhs = laguerre(n, a, z1 * z2)
        terms = [binom(n + a, n - j) * laguerre(j, a, z1) * z2**j * (1 - z2) ** (n - j) for j in range(n + 1)]
        scale = max(abs(lhs), 1e-3 * sum(map(abs, terms)))
        guarded += scale > abs(lhs)
        fails["L2"] += abs(lhs - sum(terms)) > 1e-9 * scale

        n, alpha = int(rng.integers(0, 31)), int(rng.integers(0, 4))
        x = rng.uniform(0, 100)
        cap = gamma(n + alpha + 1) / (math.factorial(n) * gamma(alpha + 1))
        fails["L3"] += math.exp(-x / 2) * abs(laguerre(n, alpha, x)) > cap * (1 + 1e-12)

        m, k = int(rng.integers(1, 11)), int(rng.integers(0, 4))
        x = rng.uniform(0, 20) or 1.0
        rhs = (-1) ** (k + 1) * x ** (k + 1) * math.factorial(m - 1) / math.factorial(m + k) * laguerre(m - 1, k + 1, x)
        fails["ede"] += abs(laguerre(m + k, -1 - k, x) - rhs) > 1e-9 * abs(rhs)
    elapsed = time.perf_counter() - t0
    ok = not any(fails.values()) and elapsed < 5.0
    detail = " ".join(f"{k}:{v}" for k, v in fails.items()) + f" failures/200 (L2 cancellation-scaled in {guarded}) time={elapsed:.2f}s"
    record_criterion(8, "Laguerre identities", ok, detail)
    assert ok


def test_criterion_09_arnoldi_invariants(record_criterion):
    rng = np.random.default_rng(9)
    worst = dict(orth=0.0, rel=0.0, prod=0.0)
    for M in (6, 12, 20):
        for c in (0.0, 2.0, 4.0):
            for delta in (0.001, 0.05):
                op = make_advection_diffusion(M, c)
                Z = np.linalg.inv(np.eye(M) - delta * op.to_dense())
                v = rng.standard_normal(M)
                v /= np.linalg.norm(v)
                dec = arnoldi_init(factor_shift(op, delta), v)
                for m in range(1, min(8, M - 1) + 1):
                    dec.extend()
                    V = dec.V
                    worst["orth"] = max(worst["orth"], np.max(np.abs(V.T @ V - np.eye(m))))
                    Vx = np.column_stack([V, dec.next_vector])
                    rel = np.linalg.norm(Z @ V - Vx @ dec.H_extended, 2) / np.linalg.norm(Z, 2)
                    worst["rel"] = max(worst["rel"], rel)
                    w = v.astype(complex)
                    for lam in sla.eigvals(dec.H):
                        w = Z @ w - lam * w
                    q = np.linalg.norm(w)
                    worst["prod"] = max(worst["prod"], abs(dec.subdiag_product - q) / q)
    ok = worst["orth"] <= 1e-12 and worst["rel"] <= 1e-10 and worst["prod"] <= 1e-8
    detail = f"orth={worst['orth']:.1e} relation={worst['rel']:.1e} product={worst['prod']:.1e}"
    record_criterion(9, "Arnoldi invariants", ok, detail)
    assert ok


def test_criterion_10_window_equation(record_criterion):
    worst, nested, contains = 0.0, True, True
    for m in range(2, 41):
        (w1, s1), (w2, s2) = (tau_window(m, 0, 0.0, e, with_steps=True) for e in (1, 2))
        for win, steps in ((w1, s1), (w2, s2)):
            for edge, n in zip(win, steps):
                worst = max(worst, window_residual(edge, m, n))
            contains &= win.lo < tau_optimal(m, 0, 0.0) < win.hi
        nested &= w2.lo <= w1.lo and w1.hi <= w2.hi
    ok = worst <= 1e-6 and nested and contains
    record_criterion(10, "window equation", ok, f"max residual={worst:.1e} nested={nested}")
    assert ok
