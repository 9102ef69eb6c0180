"""
Convergence experiments on random points in the unit disc or ball.

Protocol
--------
For every trial, point count ``N`` and nominal order ``k``:

1. draw ``N`` points uniformly in angle and radius (not in area/volume);
2. for each contraction ``sigma`` scale the points to ``sigma * x``, sample the
   test function there and estimate ``d^beta f(0)`` with a degree-``k`` fit;
3. record ``sigma**|beta| * |estimate - exact|``, the error of the derivative
   of ``x -> f(sigma x)`` on the unit-radius configuration.

Mean errors over trials are fitted with ``|e| = e0 * sigma**r``.

Each trial draws from its own generator seeded by ``(seed, trial, N)``, so
results do not depend on execution order and trials may run in parallel.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .basis import SelectionConfig, check_derivative_completeness
from .fit import estimate_derivative
from .mindex import MultiIndex, as_multiindex
from .orthogonalize import NonPositivePivotError
from .pointset import PointSet, ScaleFrame, apply_scale, make_pointset

# Loose relative rank tolerance for the studies.  Random points in the unit
# disc rarely make a monomial exactly dependent; this threshold also drops
# nearly dependent ones, giving the rejection counts the experiments describe
# (about eight order-4 rejections on 64 ball points, five usable terms on the
# six or seven points nearest the origin).
STUDY_RANK_TOL = 0.2

DEFAULT_SIGMAS = tuple(2.0 ** -k for k in range(1, 6))
DEFAULT_ORDERS = (2, 3, 4)
DEFAULT_NPOINTS = (8, 16, 32, 64, 128)


# ----------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class TestFunction:
    """``f1 = R^4``, ``f2 = exp(-R^2)``, ``f3 = x1 exp(-R^2)`` in ``dim``
    dimensions, with exact derivatives up to second order."""

    __test__ = False  # not a pytest class

    name: str
    dim: int

    def __post_init__(self):
        if self.name not in ("f1", "f2", "f3"):
            raise ValueError(f"unknown test function {self.name!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r2 = np.sum(x * x, axis=1)
        if self.name == "f1":
            return r2 * r2
        g = np.exp(-r2)
        return g if self.name == "f2" else x[:, 0] * g

    def derivative(self, x, beta) -> float:
        """Exact ``d^beta f`` at a single point, ``|beta| <= 2``."""
        x = np.asarray(x, dtype=float).reshape(-1)
        beta = as_multiindex(beta)
        if len(beta) != self.dim or x.shape[0] != self.dim:
            raise ValueError("dimension mismatch")
        order = sum(beta)
        if order > 2:
            raise ValueError("exact derivatives are available up to order 2")
        r2 = float(x @ x)
        if order == 0:
            return float(self(x[None, :])[0])
        idx = [j for j, b in enumerate(beta) for _ in range(b)]
        if self.name == "f1":
            if order == 1:
                return 4.0 * r2 * x[idx[0]]
            i, j = idx
            return 8.0 * x[i] * x[j] + 4.0 * r2 * (i == j)
        g = math.exp(-r2)
        if self.name == "f2":
            if order == 1:
                return -2.0 * x[idx[0]] * g
            i, j = idx
            return (4.0 * x[i] * x[j] - 2.0 * (i == j)) * g
        # f3 = x1 * g
        if order == 1:
            i = idx[0]
            return ((i == 0) - 2.0 * x[0] * x[i]) * g
        i, j = idx
        return (
            -2.0 * (i == 0) * x[j]
            - 2.0 * (j == 0) * x[i]
            + x[0] * (4.0 * x[i] * x[j] - 2.0 * (i == j))
        ) * g


# ----------------------------------------------------------------------------
# sampling


def sample_disc(rng: np.random.Generator, n: int) -> PointSet:
    """``n`` points with angle ~ U(0, 2 pi) and radius ~ U(0, 1)."""
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    r = rng.uniform(0.0, 1.0, n)
    return make_pointset(np.column_stack([r * np.cos(theta), r * np.sin(theta)]))


def sample_ball(rng: np.random.Generator, n: int) -> PointSet:
    """``n`` points with azimuth ~ U(0, 2 pi), polar angle ~ U(0, pi) and
    radius ~ U(0, 1), drawn independently."""
    az = rng.uniform(0.0, 2.0 * np.pi, n)
    pol = rng.uniform(0.0, np.pi, n)
    r = rng.uniform(0.0, 1.0, n)
    s = np.sin(pol)
    return make_pointset(
        np.column_stack([r * s * np.cos(az), r * s * np.sin(az), r * np.cos(pol)])
    )


def sample_points(rng: np.random.Generator, n: int, dim: int) -> PointSet:
    if dim == 2:
        return sample_disc(rng, n)
    if dim == 3:
        return sample_ball(rng, n)
    raise ValueError("random sampling is defined for dim 2 and 3")


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


# ----------------------------------------------------------------------------
# rate fit


def fit_rate(sigmas, errors) -> tuple[float, float]:
    """Least-squares fit of ``log e = log e0 + r log sigma``.

    Non-positive (or non-finite) errors cannot be logged; they are dropped
    with a warning.

    Returns
    -------
    r, e0 : float

    Raises
    ------
    ValueError
        If fewer than two usable pairs remain.
    """
    s = np.asarray(sigmas, dtype=float)
    e = np.asarray(errors, dtype=float)
    if s.shape != e.shape:
        raise ValueError("sigmas and errors differ in length")
    ok = (e > 0) & np.isfinite(e) & (s > 0)
    if not np.all(ok):
        warnings.warn(
            f"fit_rate: dropped {int(np.sum(~ok))} non-positive error(s)",
            RuntimeWarning,
            stacklevel=2,
        )
    if np.sum(ok) < 2:
        raise ValueError("need at least two positive (sigma, error) pairs")
    slope, intercept = np.polyfit(np.log(s[ok]), np.log(e[ok]), 1)
    return float(slope), float(math.exp(intercept))


# ----------------------------------------------------------------------------
# convergence study


@dataclass(frozen=True)
class StudyConfig:
    dim: int = 2
    function: str = "f1"
    beta: MultiIndex = (1, 0)
    orders: tuple[int, ...] = DEFAULT_ORDERS
    n_points: tuple[int, ...] = DEFAULT_NPOINTS
    sigmas: tuple[float, ...] = DEFAULT_SIGMAS
    trials: int = 32
    seed: int = 0
    rank_tolerance: float = STUDY_RANK_TOL
    workers: int = 1

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        beta = as_multiindex(self.beta)
        object.__setattr__(self, "beta", beta)
        if len(beta) != self.dim:
            raise ValueError("beta length must equal dim")
        if not 1 <= sum(beta) <= 2:
            raise ValueError("|beta| must be 1 or 2")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not all(0 < s <= 1 for s in self.sigmas):
            raise ValueError("sigmas must lie in (0, 1]")
        TestFunction(self.function, self.dim)

    @property
    def low_statistics(self) -> bool:
        return self.trials < 8


@dataclass
class RowResult:
    """Aggregates for one ``(order, N)`` cell."""

    order: int
    n: int
    sigmas: np.ndarray
    mean_error: np.ndarray
    min_error: np.ndarray
    max_error: np.ndarray
    mean_rejected: float
    n_incomplete: int
    n_failed: int
    rate: float = float("nan")
    eps0: float = float("nan")

    @property
    def eps_min(self) -> float:
        return float(np.nanmin(self.mean_error))

    @property
    def eps_max(self) -> float:
        return float(np.nanmax(self.mean_error))


@dataclass
class StudyReport:
    config: StudyConfig
    rows: dict[tuple[int, int], RowResult] = field(default_factory=dict)
    failures: list[tuple[int, int, int, float, str]] = field(default_factory=list)

    def row(self, order: int, n: int) -> RowResult:
        return self.rows[(order, n)]

    def rates(self, order: int) -> list[float]:
        return [self.rows[(order, n)].rate for n in self.config.n_points]

    def rejected(self, order: int) -> list[float]:
        return [self.rows[(order, n)].mean_rejected for n in self.config.n_points]


def _one_trial(cfg: StudyConfig, trial: int):
    """Errors ``[N][order][sigma]``, rejected counts and failures for a trial."""
    tf = TestFunction(cfg.function, cfg.dim)
    exact = tf.derivative(np.zeros(cfg.dim), cfg.beta)
    k = sum(cfg.beta)
    origin = np.zeros(cfg.dim)
    n_s = len(cfg.sigmas)
    errs = np.full((len(cfg.n_points), len(cfg.orders), n_s), np.nan)
    rej = np.zeros((len(cfg.n_points), len(cfg.orders)))
    incomplete = np.zeros((len(cfg.n_points), len(cfg.orders)), dtype=bool)
    failures = []
    for a, n in enumerate(cfg.n_points):
        base = sample_points(trial_rng(cfg.seed, trial, n), n, cfg.dim)
        for b, order in enumerate(cfg.orders):
            sel = SelectionConfig.order(order, rank_tolerance=cfg.rank_tolerance)
            counts = []
            for c, s in enumerate(cfg.sigmas):
                pts = apply_scale(base, ScaleFrame(origin, s))
                try:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        est = estimate_derivative(pts, tf(pts.points), origin, cfg.beta, sel)
                except (NonPositivePivotError, ZeroDivisionError, np.linalg.LinAlgError) as exc:
                    failures.append((trial, n, order, s, str(exc)))
                    continue
                errs[a, b, c] = s**k * abs(est.value - exact)
                counts.append(est.diagnostics.n_rejected)
                if c == 0:
                    incomplete[a, b] = bool(
                        check_derivative_completeness(est.basis.basis, order)
                    )
            rej[a, b] = np.mean(counts) if counts else np.nan
    return errs, rej, incomplete, failures


def run_convergence_study(cfg: StudyConfig) -> StudyReport:
    """Run the random-point study described in the module docstring."""
    trials = range(cfg.trials)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            results = list(ex.map(_one_trial, [cfg] * cfg.trials, trials))
    else:
        results = [_one_trial(cfg, t) for t in trials]

    errs = np.stack([r[0] for r in results])  # trial, N, order, sigma
    rej = np.stack([r[1] for r in results])
    inc = np.stack([r[2] for r in results])
    report = StudyReport(cfg)
    for r in results:
        report.failures.extend(r[3])
    sig = np.asarray(cfg.sigmas)
    for a, n in enumerate(cfg.n_points):
        for b, order in enumerate(cfg.orders):
            e = errs[:, a, b, :]
            n_failed = int(np.sum(np.isnan(e)))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                mean = np.nanmean(e, axis=0)
                row = RowResult(
                    order=order,
                    n=n,
                    sigmas=sig,
                    mean_error=mean,
                    min_error=np.nanmin(e, axis=0),
                    max_error=np.nanmax(e, axis=0),
                    mean_rejected=float(np.nanmean(rej[:, a, b])),
                    n_incomplete=int(np.sum(inc[:, a, b])),
                    n_failed=n_failed,
                )
                try:
                    row.rate, row.eps0 = fit_rate(sig, mean)
                except ValueError:
                    pass
            report.rows[(order, n)] = row
    return report


# ----------------------------------------------------------------------------
# single-configuration study


@dataclass
class DetailRow:
    n: int
    n_rejected: int
    accepted: tuple[MultiIndex, ...]
    quartics: tuple[MultiIndex, ...]
    errors: dict[MultiIndex, float]

    def log2_error(self, beta) -> float:
        e = self.errors[tuple(beta)]
        return math.log2(e) if e > 0 else -math.inf


@dataclass
class DetailReport:
    seed: int
    sigma: float
    points: PointSet
    rows: list[DetailRow]

    def row(self, n: int) -> DetailRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)


SECOND_DERIVATIVES_2D = ((2, 0), (1, 1), (0, 2))


def run_detail_study(
    seed: int = 0,
    sigma: float = 2.0**-3,
    n_max: int = 20,
    n_min: int = 6,
    order: int = 4,
    rank_tolerance: float = STUDY_RANK_TOL,
    points: PointSet | None = None,
) -> DetailReport:
    """Second derivatives of ``f2`` at the origin from the ``N`` nearest of
    ``n_max`` random disc points, for ``N = n_min .. n_max``.

    Errors use the same unit-radius convention as the convergence study.
    """
    if points is None:
        points = sample_disc(trial_rng(seed, 0, n_max), n_max)
    order_idx = np.argsort(np.sum(points.points**2, axis=1), kind="stable")
    points = points.subset(order_idx)
    tf = TestFunction("f2", 2)
    origin = np.zeros(2)
    sel = SelectionConfig.order(order, rank_tolerance=rank_tolerance)
    scaled = apply_scale(points, ScaleFrame(origin, sigma))
    rows = []
    for n in range(n_min, points.n + 1):
        sub = scaled.subset(np.arange(n))
        f = tf(sub.points)
        errors = {}
        est = None
        for beta in SECOND_DERIVATIVES_2D:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                est = estimate_derivative(sub, f, origin, beta, sel)
            errors[beta] = sigma**2 * abs(est.value - tf.derivative(origin, beta))
        acc = est.basis.accepted
        rows.append(
            DetailRow(
                n=n,
                n_rejected=est.diagnostics.n_rejected,
                accepted=acc,
                quartics=tuple(a for a in acc if sum(a) == 4),
                errors=errors,
            )
        )
    return DetailReport(seed, sigma, points, rows)


# ----------------------------------------------------------------------------
# output


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def report_rows_csv(report: StudyReport) -> str:
    """One row per ``(function, order, N, sigma)``."""
    cfg = report.config
    lines = [
        report_header(cfg),
        "function,order,N,sigma,mean_abs_error,min_abs_error,max_abs_error,"
        "mean_rejected,n_incomplete,n_failed",
    ]
    for (order, n), row in sorted(report.rows.items()):
        for c, s in enumerate(row.sigmas):
            lines.append(
                ",".join(
                    [cfg.function, str(order), str(n), _fmt(s), _fmt(row.mean_error[c]),
                     _fmt(row.min_error[c]), _fmt(row.max_error[c]),
                     _fmt(row.mean_rejected), str(row.n_incomplete), str(row.n_failed)]
                )
            )
    return "\n".join(lines) + "\n"


def report_summary_csv(report: StudyReport) -> str:
    """Table layout: rate per ``N``, then ``eps_min`` and ``eps_max`` at the
    largest ``N``."""
    cfg = report.config
    n_last = cfg.n_points[-1]
    lines = [
        report_header(cfg),
        ",".join(
            ["function", "order"]
            + [f"rate_N{n}" for n in cfg.n_points]
            + [f"eps_min_N{n_last}", f"eps_max_N{n_last}"]
        ),
    ]
    for order in cfg.orders:
        row = report.rows[(order, n_last)]
        lines.append(
            ",".join(
                [cfg.function, str(order)]
                + [_fmt(r) for r in report.rates(order)]
                + [_fmt(row.eps_min), _fmt(row.eps_max)]
            )
        )
    return "\n".join(lines) + "\n"


def report_plot_data(report: StudyReport, order: int, n: int) -> str:
    """``log2 sigma`` against ``log2`` mean error for one cell."""
    row = report.rows[(order, n)]
    lines = [f"# function={report.config.function} order={order} N={n}",
             "log2_sigma log2_mean_error"]
    for s, e in zip(row.sigmas, row.mean_error):
        le = math.log2(e) if e > 0 else float("-inf")
        lines.append(f"{_fmt(math.log2(s))} {_fmt(le)}")
    return "\n".join(lines) + "\n"


def format_summary_table(report: StudyReport) -> str:
    """Fixed-width table for terminals."""
    cfg = report.config
    n_last = cfg.n_points[-1]
    head = f"{'':4}{'k':>3}" + "".join(f"{n:>8}" for n in cfg.n_points)
    head += f"{'eps_min':>12}{'eps_max':>12}"
    lines = [head]
    for i, order in enumerate(cfg.orders):
        row = report.rows[(order, n_last)]
        label = cfg.function if i == 0 else ""
        lines.append(
            f"{label:4}{order:>3}"
            + "".join(f"{r:8.2f}" for r in report.rates(order))
            + f"{row.eps_min:12.2e}{row.eps_max:12.2e}"
        )
    lines.append("mean rejected monomials:")
    for order in cfg.orders:
        lines.append(f"{'':4}{order:>3}" + "".join(f"{v:8.2f}" for v in report.rejected(order)))
    return "\n".join(lines) + "\n"


def report_header(cfg: StudyConfig) -> str:
    beta = ",".join(str(b) for b in cfg.beta)
    sig = " ".join(_fmt(s) for s in cfg.sigmas)
    h = (f"# dim={cfg.dim} function={cfg.function} beta={beta} trials={cfg.trials} "
         f"seed={cfg.seed} rank_tol={_fmt(cfg.rank_tolerance)} sigmas={sig}")
    if cfg.low_statistics:
        h += " LOW-STATISTICS"
    return h


def detail_csv(report: DetailReport) -> str:
    lines = [
        f"# seed={report.seed} sigma={_fmt(report.sigma)}",
        "N,n_rejected,quartics,err_xx,err_xy,err_yy",
    ]
    for r in report.rows:
        q = " ".join("".join(str(a) for a in alpha) for alpha in r.quartics)
        lines.append(
            ",".join([str(r.n), str(r.n_rejected), q]
                     + [_fmt(r.errors[b]) for b in SECOND_DERIVATIVES_2D])
        )
    return "\n".join(lines) + "\n"
