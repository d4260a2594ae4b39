"""Generalized Laguerre polynomials ``L_n^(alpha)(z)`` for complex arguments."""

import math

import numpy as np
from scipy.special import binom


def _is_negative_integer(alpha):
    return alpha < 0 and float(alpha).is_integer()


def laguerre(n, alpha, z):
    """Evaluate ``L_n^(alpha)(z)`` by the three-term recurrence.

    ``z`` may be a scalar or an array. For a negative integer ``alpha = -j``
    with ``n >= j`` the connection formula
    ``L_n^(-j)(z) = (-z)^j (n-j)!/n! L_{n-j}^(j)(z)`` is used instead.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if n > 200:
        raise ValueError("degree above 200 is not supported")
    z = np.asarray(z)
    if _is_negative_integer(alpha) and n >= -alpha:
        j = int(-alpha)
        ratio = math.exp(math.lgamma(n - j + 1) - math.lgamma(n + 1))
        out = (-z) ** j * ratio * laguerre(n - j, j, z)
        return out[()] if out.ndim == 0 else out
    prev = np.ones_like(z, dtype=np.result_type(z, float))
    if n == 0:
        return prev[()] if prev.ndim == 0 else prev
    cur = 1.0 + alpha - z
    for i in range(1, n):
        prev, cur = cur, ((2 * i + 1 + alpha - z) * cur - (i + alpha) * prev) / (i + 1)
    cur = np.asarray(cur)
    return cur[()] if cur.ndim == 0 else cur


def log_abs_laguerre_sequence(n, alpha, x):
    """``log|L_j^(alpha)(x)|`` for ``j = 0..n`` from one rescaled recurrence.

    The recurrence is renormalized whenever the iterates grow past ``1e150``
    so that large degrees and arguments do not overflow. Exact zeros give
    ``-inf``.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    out = np.empty(n + 1)
    out[0] = 0.0
    if n == 0:
        return out
    log_scale = 0.0
    prev, cur = 1.0 + 0j, complex(1.0 + alpha - x)
    with np.errstate(divide="ignore"):
        out[1] = np.log(abs(cur))
        for i in range(1, n):
            prev, cur = cur, ((2 * i + 1 + alpha - x) * cur - (i + alpha) * prev) / (i + 1)
            big = max(abs(cur), abs(prev))
            if big > 1e150:
                prev, cur = prev / big, cur / big
                log_scale += math.log(big)
            out[i + 1] = np.log(abs(cur)) + log_scale
    return out


def laguerre_sum_oracle(n, alpha, z):
    """Direct evaluation of the explicit sum ``sum_j (-1)^j C(n+alpha, n-j) z^j / j!``.

    Independent of :func:`laguerre`; only for small ``n`` (cancellation and
    factorial growth).
    """
    if n > 25:
        raise ValueError("explicit-sum oracle is limited to n <= 25")
    total = 0j
    for j in range(n + 1):
        total += (-1) ** j * binom(n + alpha, n - j) * z**j / math.factorial(j)
    return total
