"""Experiment configuration and runners that write per-run CSV files."""

import io
import math
import os
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .bounds import CROUZEIX_K, BoundReport
from .errors import ConfigError, MaxIterations
from .operators import make_advection_diffusion, read_coordinate
from .phifun import PhiRequest, phi_oracle_dense
from .residual import MODES, StoppingRule
from .sector import sector_info
from .solver import rd_arnoldi_phi
from .tauselect import calibrate_on_coarse, tau_window

ORACLE_LIMIT = 400
LARGE_M = 1000


def _floats(s):
    return tuple(float(x) for x in s.split(",") if x.strip())


def _ints(s):
    return tuple(int(x) for x in s.split(",") if x.strip())


def _bool(s):
    s = s.strip().lower()
    if s in ("on", "true", "yes", "1"):
        return True
    if s in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _tau_spec(s):
    s = s.strip()
    if s == "auto":
        return s
    num = s[: -len("/cos")] if s.endswith("/cos") else s
    if not float(num) > 0:
        raise ValueError("tau must be positive")
    return s


@dataclass
class ExperimentConfig:
    """Flat experiment description, readable from a ``key = value`` file.

    ``tau`` is ``auto`` (calibrate on an ``M_coarse`` grid), a number, or
    ``<number>/cos`` meaning that number divided by ``cos(theta)``.
    ``tau_factors`` multiplies the resolved ``tau`` (one run per factor).
    ``theta`` is ``auto`` (computed on the coarse grid) or a number.
    """

    operator: str = "advdiff"
    file: str = ""
    M: int = 200
    c: tuple = (2.0,)
    k: tuple = (0, 1, 2)
    h: float = 0.5
    tau: str = "auto"
    tau_factors: tuple = (1.0,)
    theta: str = "auto"
    M_coarse: int = 50
    calib_tol: float = 1e-12
    tolerance: float = 1e-12
    max_m: int = 60
    stop_mode: str = "residual"
    check_every: int = 1
    oracle: bool = True
    large: bool = False
    seed: int = 0
    out: str = "results"

    _PARSERS = {
        "operator": str,
        "file": str,
        "M": int,
        "c": _floats,
        "k": _ints,
        "h": float,
        "tau": _tau_spec,
        "tau_factors": _floats,
        "theta": str,
        "M_coarse": int,
        "calib_tol": float,
        "tolerance": float,
        "max_m": int,
        "stop_mode": str,
        "check_every": int,
        "oracle": _bool,
        "large": _bool,
        "seed": int,
        "out": str,
    }

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.operator not in ("advdiff", "file"):
            raise ConfigError(f"operator must be 'advdiff' or 'file', got {self.operator!r}")
        if self.operator == "file" and not self.file:
            raise ConfigError("operator=file needs file=PATH")
        if self.M < 2 or self.M_coarse < 2:
            raise ConfigError("M and M_coarse must be >= 2")
        if not self.c or not self.k or not self.tau_factors:
            raise ConfigError("c, k and tau_factors must be non-empty")
        if any(not 0 <= k <= 6 for k in self.k):
            raise ConfigError("k entries must lie in 0..6")
        if not self.h > 0:
            raise ConfigError("h must be positive")
        if self.stop_mode not in MODES:
            raise ConfigError(f"stop_mode must be one of {MODES}")
        if self.stop_mode == "oracle" and not self.oracle:
            raise ConfigError("stop_mode=oracle needs oracle=on")
        if self.theta != "auto":
            try:
                float(self.theta)
            except ValueError:
                raise ConfigError(f"theta must be 'auto' or a number, got {self.theta!r}") from None

    @classmethod
    def from_text(cls, text, source="<config>"):
        """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are rejected."""
        kw = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in cls._PARSERS:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
            try:
                kw[key] = cls._PARSERS[key](val)
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
        return cls(**kw)

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_text(text, source=str(path))

    def replace(self, **kw):
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(kw)
        return ExperimentConfig(**d)

    def effective_M(self):
        return LARGE_M if self.large else self.M

    def use_oracle(self):
        return self.oracle and not self.large

    def describe(self):
        """One-line resolved config for CSV comment headers."""
        parts = []
        for key, val in asdict(self).items():
            if isinstance(val, tuple):
                val = ",".join(repr(x) if isinstance(x, float) else str(x) for x in val)
            parts.append(f"{key}={val}")
        return " ".join(parts)


def build_operator(cfg, c, M=None):
    if cfg.operator == "file":
        try:
            return read_coordinate(cfg.file)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load operator: {exc}") from None
    return make_advection_diffusion(M or cfg.effective_M(), c)


def resolve_theta(cfg, c):
    """Sector semiangle computed on the coarse grid (0 for symmetric operators)."""
    if cfg.theta != "auto":
        return float(cfg.theta)
    op = build_operator(cfg, c, cfg.M_coarse)
    return 0.0 if op.is_symmetric() else sector_info(op).theta


def resolve_tau(cfg, c, k, theta):
    if cfg.tau == "auto":
        if cfg.operator == "file":
            raise ConfigError("tau=auto needs a built-in operator to calibrate on")
        factory = lambda M: make_advection_diffusion(M, c)
        return calibrate_on_coarse(factory, cfg.M_coarse, k, cfg.h, theta=theta, tol=cfg.calib_tol).tau_opt
    if cfg.tau.endswith("/cos"):
        return float(cfg.tau[: -len("/cos")]) / math.cos(theta)
    return float(cfg.tau)


def start_vector(M):
    return np.ones(M) / math.sqrt(M)


def _fmt(x):
    if x is None:
        return "nan"
    return "%.15e" % x


def write_csv(path, header, rows, comment):
    """Comma-separated file with a ``#`` comment line, a header row and ``%.15e`` values."""
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(str(x) if isinstance(x, (int, np.integer)) else _fmt(x) for x in row) + "\n")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(buf.getvalue())
    return path


def read_csv(path):
    """Inverse of :func:`write_csv`: ``(comment, header, float array)``."""
    with open(path) as fh:
        comment = fh.readline()[2:].rstrip("\n")
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return comment, header, data


@dataclass
class RunRecord:
    c: float
    k: int
    tau: float
    theta: float
    report: BoundReport
    converged: bool
    path: str = ""
    extra: dict = field(default_factory=dict)


def _run_one(cfg, op, c, k, tau, theta, with_oracle, stop):
    v = start_vector(op.M)
    req = PhiRequest(k, cfg.h, v, tau)
    reference = phi_oracle_dense(k, cfg.h, op.to_dense(), v) if with_oracle else None
    sym = op.is_symmetric()
    theta_b = theta if sym else theta + 0.01
    try:
        res = rd_arnoldi_phi(
            req, op, stop, theta=theta_b, K=1.0 if sym else CROUZEIX_K, reference=reference
        )
        return res.report, True
    except MaxIterations as exc:
        return exc.approximation.report, False


def _tag(x):
    return ("%g" % x).replace(".", "p").replace("-", "m")


def run_convergence_experiment(cfg):
    """Per-m error, bounds, residual and subdiagonal product, one CSV per ``(k, c, tau factor)``."""
    M = cfg.effective_M()
    with_oracle = cfg.use_oracle()
    if with_oracle and M > ORACLE_LIMIT:
        raise ConfigError(f"oracle needs M <= {ORACLE_LIMIT}; use oracle=off")
    stop = StoppingRule(cfg.tolerance, min(cfg.max_m, M), cfg.stop_mode, cfg.check_every)
    records = []
    for c in cfg.c:
        op = build_operator(cfg, c)
        theta = resolve_theta(cfg, c)
        for k in cfg.k:
            tau0 = resolve_tau(cfg, c, k, theta)
            for fac in cfg.tau_factors:
                tau = tau0 * fac
                report, ok = _run_one(cfg, op, c, k, tau, theta, with_oracle, stop)
                cols = ["m"] + (["true_error"] if with_oracle else [])
                cols += ["bound_fe1", "bound_fe2", "residual", "subdiag_product"]
                rows = report.rows(
                    ["m"]
                    + (["true_error"] if with_oracle else [])
                    + ["bound_fe1", "bound_fe2", "residual_estimate", "subdiag_product"]
                )
                name = f"converge_k{k}_c{_tag(c)}" + ("" if fac == 1.0 else f"_x{_tag(fac)}") + ".csv"
                comment = f"{cfg.describe()} resolved_tau={tau!r} resolved_theta={theta!r} M_run={op.M}"
                path = write_csv(os.path.join(cfg.out, name), cols, rows, comment)
                records.append(RunRecord(c, k, tau, theta, report, ok, path))
    return records


def run_residual_experiment(cfg):
    """True error against the generalized residual, one CSV per ``(k, c)``."""
    M = cfg.effective_M()
    if M > ORACLE_LIMIT or not cfg.use_oracle():
        raise ConfigError(f"residual experiment needs the oracle (M <= {ORACLE_LIMIT})")
    stop = StoppingRule(cfg.tolerance, min(cfg.max_m, M), cfg.stop_mode, cfg.check_every)
    records = []
    for c in cfg.c:
        op = build_operator(cfg, c)
        theta = resolve_theta(cfg, c)
        for k in cfg.k:
            tau = resolve_tau(cfg, c, k, theta)
            report, ok = _run_one(cfg, op, c, k, tau, theta, True, stop)
            rows = report.rows(["m", "true_error", "residual_estimate"])
            comment = f"{cfg.describe()} resolved_tau={tau!r} resolved_theta={theta!r} M_run={op.M}"
            path = write_csv(
                os.path.join(cfg.out, f"residual_k{k}_c{_tag(c)}.csv"),
                ["m", "true_error", "residual"],
                rows,
                comment,
            )
            records.append(RunRecord(c, k, tau, theta, report, ok, path))
    return records


def window_table(m_values=range(2, 41), k=0, theta=0.0):
    """Rows ``(m, lo1, hi1, lo2, hi2)`` of the robustness windows for one and two extra steps."""
    rows = []
    for m in m_values:
        w1 = tau_window(m, k, theta, extra=1)
        w2 = tau_window(m, k, theta, extra=2)
        rows.append((m, w1.lo, w1.hi, w2.lo, w2.hi))
    return rows


def run_window_experiment(cfg, m_values=range(2, 41)):
    k = cfg.k[0]
    theta = 0.0 if cfg.theta == "auto" else float(cfg.theta)
    rows = window_table(m_values, k, theta)
    comment = f"{cfg.describe()} window_k={k} window_theta={theta!r}"
    header = ["m", "tau1_extra1", "tau2_extra1", "tau1_extra2", "tau2_extra2"]
    return write_csv(os.path.join(cfg.out, "window.csv"), header, rows, comment), rows


def run_calibration(cfg):
    """Calibrated ``(c, k, theta, target_m, tau, window)`` for every pair in the config."""
    out = []
    for c in cfg.c:
        theta = resolve_theta(cfg, c)
        for k in cfg.k:
            pol = calibrate_on_coarse(
                lambda M, c=c: make_advection_diffusion(M, c), cfg.M_coarse, k, cfg.h, theta=theta, tol=cfg.calib_tol
            )
            out.append((c, k, pol))
    return out


def run_sector(cfg, c):
    op = build_operator(cfg, c)
    return sector_info(op, with_radius=True)


def run_phi(cfg, c, k):
    """Single ``phi_k(h L) v`` evaluation; returns the approximation and the tau used."""
    op = build_operator(cfg, c)
    theta = resolve_theta(cfg, c)
    tau = resolve_tau(cfg, c, k, theta)
    mode = "residual" if cfg.stop_mode == "oracle" else cfg.stop_mode
    stop = StoppingRule(cfg.tolerance, min(cfg.max_m, op.M), mode, cfg.check_every)
    sym = op.is_symmetric()
    req = PhiRequest(k, cfg.h, start_vector(op.M), tau)
    res = rd_arnoldi_phi(req, op, stop, theta=theta if sym else theta + 0.01, K=1.0 if sym else CROUZEIX_K)
    return res, tau
