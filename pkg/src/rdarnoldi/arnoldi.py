"""Arnoldi process for ``Z = (I - delta L)^{-1}``.

Builds ``Z V_m = V_m H_m + h_{m+1,m} v_{m+1} e_m^T`` one column at a time,
with modified Gram-Schmidt followed by one full reorthogonalization pass.
"""

import math

import numpy as np

from .errors import AtFullDimension, ZeroVector

BREAKDOWN_RTOL = 1e-14


class ArnoldiDecomposition:
    """Incrementally extensible Arnoldi decomposition (single writer).

    Attributes
    ----------
    fact : ShiftedFactorization
        Supplies ``Z x``.
    m : int
        Current dimension of the Krylov space.
    breakdown : bool
        Set once ``h_{m+1,m}`` vanishes; the space is then Z-invariant.
    """

    def __init__(self, fact, v):
        self.fact = fact
        self.M = fact.M
        self._V = np.zeros((self.M, min(self.M, 64) + 1), dtype=v.dtype)
        self._V[:, 0] = v
        self._H = np.zeros((self._V.shape[1], self._V.shape[1] - 1), dtype=v.dtype)
        self.m = 0
        self.breakdown = False
        self.log_subdiag_product = 0.0

    @property
    def V(self):
        """Orthonormal basis ``V_m`` (M x m)."""
        return self._V[:, : self.m]

    @property
    def next_vector(self):
        """``v_{m+1}``; zero after breakdown."""
        return self._V[:, self.m]

    @property
    def H(self):
        """Square Hessenberg ``H_m`` (m x m)."""
        return self._H[: self.m, : self.m]

    @property
    def H_extended(self):
        """``(m+1) x m`` Hessenberg including ``h_{m+1,m}``."""
        return self._H[: self.m + 1, : self.m]

    @property
    def subdiagonals(self):
        return np.real(np.diagonal(self._H, -1)[: self.m])

    @property
    def h_next(self):
        """``h_{m+1,m}`` (zero before the first extension)."""
        return float(np.real(self._H[self.m, self.m - 1])) if self.m else 0.0

    @property
    def subdiag_product(self):
        if self.breakdown:
            return 0.0
        return math.exp(self.log_subdiag_product)

    def _grow(self):
        cols = self._V.shape[1]
        new_cols = min(self.M + 1, 2 * cols)
        V = np.zeros((self.M, new_cols), dtype=self._V.dtype)
        V[:, :cols] = self._V
        H = np.zeros((new_cols, new_cols - 1), dtype=self._H.dtype)
        H[: self._H.shape[0], : self._H.shape[1]] = self._H
        self._V, self._H = V, H

    def extend(self):
        if self.breakdown:
            raise AtFullDimension("decomposition already broke down; the space is invariant")
        if self.m >= self.M:
            raise AtFullDimension(f"Krylov space already has full dimension {self.M}")
        if self.m + 1 >= self._V.shape[1]:
            self._grow()
        j = self.m
        w = self.fact.solve(self._V[:, j])
        if w.dtype != self._V.dtype:
            self._V = self._V.astype(w.dtype)
            self._H = self._H.astype(w.dtype)
        norm_zv = np.linalg.norm(w)
        for _ in range(2):
            for i in range(j + 1):
                vi = self._V[:, i]
                hij = np.vdot(vi, w)
                w = w - hij * vi
                self._H[i, j] += hij
        beta = np.linalg.norm(w)
        self.m = j + 1
        if beta <= BREAKDOWN_RTOL * norm_zv or self.m == self.M:
            self.breakdown = True
            self._H[j + 1, j] = 0.0
        else:
            self._H[j + 1, j] = beta
            self._V[:, j + 1] = w / beta
            self.log_subdiag_product += math.log(beta)
        return self


def arnoldi_init(fact, v):
    """Start a decomposition from a unit vector ``v`` (renormalized if within 1e-6)."""
    v = np.asarray(v)
    if v.dtype.kind not in "fc":
        v = v.astype(float)
    if v.shape != (fact.M,):
        raise ValueError(f"starting vector must have shape ({fact.M},)")
    norm = np.linalg.norm(v)
    if norm < 1e-300:
        raise ZeroVector("starting vector is zero")
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"starting vector must have unit norm, got {norm:.3e}")
    return ArnoldiDecomposition(fact, v / norm)


def arnoldi_extend(dec):
    return dec.extend()


def subdiagonal_product(dec, m=None):
    """``prod_{i=1}^m h_{i+1,i}``; equals ``||q_m(Z) v||`` with ``q_m`` the characteristic polynomial of ``H_m``."""
    m = dec.m if m is None else m
    if m > dec.m:
        raise ValueError(f"m={m} exceeds the current dimension {dec.m}")
    return float(np.prod(dec.subdiagonals[:m]))
