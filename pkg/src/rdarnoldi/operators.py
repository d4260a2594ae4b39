"""Sectorial operators in band storage and the shifted solves ``(I - delta L)^{-1}``.

Band layout follows ``scipy.linalg.solve_banded``: ``bands[upper + i - j, j]``
holds ``L[i, j]`` for ``-lower <= j - i <= upper``.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import get_lapack_funcs

from .errors import NotSupported, SingularShift

MAX_BANDWIDTH = 32


@dataclass(frozen=True, eq=False)
class SectorialOperator:
    """A square banded matrix ``L`` with ``F(L)`` expected in the left half-plane."""

    bands: np.ndarray
    lower: int
    upper: int
    name: str = "custom"

    def __post_init__(self):
        bands = np.array(self.bands, copy=True)
        if bands.dtype.kind not in "fc":
            bands = bands.astype(float)
        if bands.ndim != 2 or bands.shape[0] != self.lower + self.upper + 1:
            raise ValueError("band array has the wrong number of rows")
        if bands.shape[1] < 1:
            raise ValueError("operator dimension must be positive")
        if not np.all(np.isfinite(bands)):
            raise ValueError("operator has non-finite entries")
        bands.setflags(write=False)
        object.__setattr__(self, "bands", bands)

    @property
    def M(self):
        return self.bands.shape[1]

    @property
    def dtype(self):
        return self.bands.dtype

    def diagonal(self, offset=0):
        """Entries ``L[i, i + offset]``; empty when outside the band."""
        if offset > self.upper or -offset > self.lower or abs(offset) >= self.M:
            return np.zeros(max(self.M - abs(offset), 0), dtype=self.dtype)
        row = self.upper - offset
        if offset >= 0:
            return self.bands[row, offset:].copy()
        return self.bands[row, : self.M + offset].copy()

    def apply(self, x):
        x = np.asarray(x)
        if x.shape[0] != self.M:
            raise ValueError(f"dimension mismatch: operator {self.M}, vector {x.shape[0]}")
        y = np.zeros(x.shape, dtype=np.result_type(self.dtype, x.dtype))
        for d in range(-self.lower, self.upper + 1):
            diag = self.diagonal(d)
            if diag.size == 0:
                continue
            if d >= 0:
                y[: self.M - d] += (diag * x[d:].T).T
            else:
                y[-d:] += (diag * x[: self.M + d].T).T
        return y

    __matmul__ = apply

    def to_dense(self):
        A = np.zeros((self.M, self.M), dtype=self.dtype)
        for d in range(-self.lower, self.upper + 1):
            diag = self.diagonal(d)
            if diag.size:
                A += np.diag(diag, d)
        return A

    def is_symmetric(self, rtol=1e-14):
        scale = np.max(np.abs(self.bands), initial=0.0)
        for d in range(1, max(self.lower, self.upper) + 1):
            if np.max(np.abs(self.diagonal(d) - np.conj(self.diagonal(-d))), initial=0.0) > rtol * scale:
                return False
        return np.max(np.abs(self.diagonal(0).imag), initial=0.0) <= rtol * scale


def from_diagonals(diagonals, name="custom"):
    """Build an operator from ``{offset: array}`` (arrays of length ``M - |offset|``)."""
    M = len(diagonals[0])
    lower = max([-d for d in diagonals if d < 0], default=0)
    upper = max([d for d in diagonals if d > 0], default=0)
    dtype = np.result_type(*[np.asarray(v) for v in diagonals.values()], float)
    bands = np.zeros((lower + upper + 1, M), dtype=dtype)
    for d, vals in diagonals.items():
        vals = np.asarray(vals)
        if vals.shape != (M - abs(d),):
            raise ValueError(f"diagonal {d} has length {vals.shape}, expected {M - abs(d)}")
        if d >= 0:
            bands[upper - d, d:] = vals
        else:
            bands[upper - d, : M + d] = vals
    return SectorialOperator(bands, lower, upper, name=name)


def make_advection_diffusion(M, c=0.0):
    """Central-difference discretization of ``u'' - c u'`` on (0, 1), homogeneous Dirichlet.

    This is the negative of ``-u'' + c u'`` so that the field of values lies in
    the left half-plane.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if c < 0:
        raise ValueError("advection speed c must be nonnegative")
    dx = 1.0 / (M + 1)
    sub = 1.0 / dx**2 + c / (2.0 * dx)
    sup = 1.0 / dx**2 - c / (2.0 * dx)
    diags = {0: np.full(M, -2.0 / dx**2)}
    if M > 1:
        diags[-1] = np.full(M - 1, sub)
        diags[1] = np.full(M - 1, sup)
    return from_diagonals(diags, name=f"advdiff(M={M},c={c:g})")


def zero_operator(M):
    return from_diagonals({0: np.zeros(M)}, name=f"zero(M={M})")


def diagonal_operator(entries):
    entries = np.asarray(entries)
    return from_diagonals({0: entries}, name=f"diag(M={entries.size})")


def from_triplets(M, rows, cols, values, name="triplets"):
    """Assemble a banded operator from 0-based coordinate triplets (duplicates summed)."""
    rows = np.asarray(rows, dtype=int)
    cols = np.asarray(cols, dtype=int)
    values = np.asarray(values)
    if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= M or cols.max() >= M):
        raise ValueError("triplet index out of range")
    offsets = cols - rows
    lower = int(max(-offsets.min(), 0)) if offsets.size else 0
    upper = int(max(offsets.max(), 0)) if offsets.size else 0
    if max(lower, upper) > MAX_BANDWIDTH:
        raise NotSupported(f"bandwidth {max(lower, upper)} exceeds {MAX_BANDWIDTH}")
    dtype = np.result_type(values.dtype, float)
    bands = np.zeros((lower + upper + 1, M), dtype=dtype)
    np.add.at(bands, (upper + rows - cols, cols), values)
    return SectorialOperator(bands, lower, upper, name=name)


def read_coordinate(path):
    """Read the ``M nnz`` header + ``row col value`` (1-based) text format."""
    path = Path(path)
    lines = [
        (n, ln.split("#", 1)[0].split())
        for n, ln in enumerate(path.read_text().splitlines(), start=1)
    ]
    lines = [(n, tok) for n, tok in lines if tok]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    n0, header = lines[0]
    if len(header) != 2:
        raise ValueError(f"{path}:{n0}: header must be 'M nnz'")
    M, nnz = int(header[0]), int(header[1])
    entries = lines[1:]
    if len(entries) != nnz:
        raise ValueError(f"{path}: header announces {nnz} entries, found {len(entries)}")
    rows, cols, vals = [], [], []
    for n, tok in entries:
        if len(tok) != 3:
            raise ValueError(f"{path}:{n}: expected 'row col value'")
        try:
            rows.append(int(tok[0]) - 1)
            cols.append(int(tok[1]) - 1)
            vals.append(float(tok[2]))
        except ValueError as exc:
            raise ValueError(f"{path}:{n}: {exc}") from None
    return from_triplets(M, rows, cols, vals, name=path.name)


def write_coordinate(op, path):
    """Write ``op`` in the coordinate format read by :func:`read_coordinate` (real operators only)."""
    if np.iscomplexobj(op.bands):
        raise NotSupported("the coordinate format holds real values only")
    A = op.to_dense()
    r, c = np.nonzero(A)
    with open(path, "w") as fh:
        fh.write(f"{op.M} {r.size}\n")
        for i, j in zip(r, c):
            fh.write(f"{i + 1} {j + 1} {A[i, j]:.17g}\n")


@dataclass(frozen=True, eq=False)
class ShiftedFactorization:
    """Banded LU (partial pivoting) of ``I - delta*L``; reusable for any number of solves."""

    op: SectorialOperator
    delta: float
    _lu: np.ndarray = field(repr=False)
    _piv: np.ndarray = field(repr=False)

    @property
    def M(self):
        return self.op.M

    def solve(self, b):
        """Return ``(I - delta L)^{-1} b`` for a vector or a block of columns."""
        b = np.asarray(b)
        if b.shape[0] != self.M:
            raise ValueError(f"dimension mismatch: operator {self.M}, vector {b.shape[0]}")
        if b.dtype.kind == "c" and self._lu.dtype.kind != "c":
            return self.solve(b.real) + 1j * self.solve(b.imag)
        gbtrs = get_lapack_funcs("gbtrs", (self._lu,))
        rhs = np.asarray(b, dtype=self._lu.dtype).reshape(self.M, -1)
        x, info = gbtrs(self._lu, self.op.lower, self.op.upper, rhs, self._piv)
        if info != 0:
            raise SingularShift(f"gbtrs failed with info={info}")
        return x.reshape(b.shape)


def factor_shift(op, delta):
    """Factor ``I - delta*L`` once; the result is read-only and thread-safe."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    kl, ku, M = op.lower, op.upper, op.M
    shifted = -delta * op.bands
    shifted[ku, :] += 1.0
    ab = np.zeros((2 * kl + ku + 1, M), dtype=shifted.dtype)
    ab[kl:, :] = shifted
    gbtrf = get_lapack_funcs("gbtrf", (ab,))
    lu, piv, info = gbtrf(ab, kl, ku)
    scale = np.max(np.abs(shifted))
    pivots = np.abs(lu[kl + ku, :])
    if info != 0 or np.min(pivots) < 1e-14 * scale:
        raise SingularShift(f"I - {delta:g} L is numerically singular (info={info})")
    lu.setflags(write=False)
    return ShiftedFactorization(op, float(delta), lu, piv)


def apply_Z(fact, x):
    """``Z x`` with ``Z = (I - delta L)^{-1}``."""
    return fact.solve(x)
