"""Monte Carlo experiments confronting empirical estimator distributions with
their theoretical targets.

Each experiment simulates M independent replications (stream (seed, rep)),
computes the scaled centered estimator pair per replication, and compares
empirical covariances against a target with per-entry Monte Carlo standard
errors. Replications run in fixed-size chunks whose boundaries do not depend
on the worker count, so reports are byte-identical for any --threads value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import Gamma2, bahadur_remainder, representation_gap
from .conditions import approve
from .errors import ParameterError, RefusalError
from .estimators import centred_abs_moment, partial_sum_process, sample_quantile
from .parallel import DEFAULT_CHUNK, run_chunked
from .processes import ProcessSpec, simulate_batch, spec_fingerprint
from .truth import Truth

__all__ = [
    "ExperimentConfig",
    "CltReport",
    "FcltReport",
    "DecayTable",
    "run_clt_experiment",
    "run_fclt_experiment",
    "run_bahadur_experiment",
    "run_representation_experiment",
]

_MIN_REPS_FOR_VERDICT = 10
_DECAY_SLACK = 0.10


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs of one Monte Carlo experiment."""

    spec: ProcessSpec
    p: float
    r: int
    n: int
    reps: int
    seed: int | tuple = 0
    truth: Truth | None = None
    target: Gamma2 | None = None
    t_grid: tuple[float, ...] | None = None
    n_ladder: tuple[int, ...] | None = None
    burn_in: int | None = None
    se_threshold: float = 3.0  # pass/fail band in MC standard errors
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self):
        if self.reps < 2:
            raise ParameterError("reps must be >= 2")
        if not 0 < self.p < 1:
            raise ParameterError("p must lie in (0,1)")
        if self.r < 1:
            raise ParameterError("r must be a positive integer")
        if self.n < 1:
            raise ParameterError("n must be >= 1")


@dataclass(frozen=True)
class CltReport:
    empirical_mean: np.ndarray  # 2-vector of sqrt(n)-scaled centered estimators
    empirical_cov: np.ndarray  # 2x2
    cov_se: np.ndarray  # 2x2 per-entry MC standard errors
    target: Gamma2 | None
    per_entry_z: np.ndarray | None  # 2x2 deviations / SE
    verdict: list[list[str]]  # pass | fail | inconclusive | no-target
    marginal_skewness: np.ndarray
    marginal_excess_kurtosis: np.ndarray
    skewness_z: np.ndarray
    kurtosis_z: np.ndarray
    used: int
    quarantined: int
    config_fingerprint: str
    pilot_fingerprint: str | None = None

    def to_obj(self) -> dict:
        return {
            "empirical_mean": self.empirical_mean.tolist(),
            "empirical_cov": self.empirical_cov.tolist(),
            "cov_se": self.cov_se.tolist(),
            "target": None if self.target is None else self.target.to_obj(),
            "per_entry_z": None if self.per_entry_z is None else self.per_entry_z.tolist(),
            "verdict": self.verdict,
            "marginal_skewness": self.marginal_skewness.tolist(),
            "marginal_excess_kurtosis": self.marginal_excess_kurtosis.tolist(),
            "skewness_z": self.skewness_z.tolist(),
            "kurtosis_z": self.kurtosis_z.tolist(),
            "used": self.used,
            "quarantined": self.quarantined,
            "config_fingerprint": self.config_fingerprint,
            "pilot_fingerprint": self.pilot_fingerprint,
        }


@dataclass(frozen=True)
class FcltReport:
    t_grid: tuple[float, ...]
    prefix_fractions: tuple[float, ...]  # realized floor(n t)/n used for scaling
    cov_by_t: np.ndarray  # (len(t_grid), 2, 2)
    scaling_z: np.ndarray  # (len(t_grid), 2, 2): (cov(t) - tau cov(1)) / SE
    increment_corr: np.ndarray  # (n_pairs, 2, 2) correlations of disjoint increments
    increment_corr_z: np.ndarray
    increment_windows: list[list[float]]
    clt: CltReport  # the t = 1 slice
    used: int
    quarantined: int
    config_fingerprint: str
    # grid-based checks cover finite-dimensional consequences of the
    # process-level limit only; full weak convergence is out of numerical reach

    def to_obj(self) -> dict:
        return {
            "t_grid": list(self.t_grid),
            "prefix_fractions": list(self.prefix_fractions),
            "cov_by_t": self.cov_by_t.tolist(),
            "scaling_z": self.scaling_z.tolist(),
            "increment_corr": self.increment_corr.tolist(),
            "increment_corr_z": self.increment_corr_z.tolist(),
            "increment_windows": self.increment_windows,
            "clt": self.clt.to_obj(),
            "used": self.used,
            "quarantined": self.quarantined,
            "config_fingerprint": self.config_fingerprint,
            "note": "finite-dimensional checks of the process-level limit",
        }


@dataclass(frozen=True)
class DecayTable:
    statistic: str  # which remainder the table tracks
    n_values: tuple[int, ...]
    median: tuple[float, ...]
    p90: tuple[float, ...]
    std: tuple[float, ...]
    se: tuple[float, ...]
    verdict: str  # pass | fail | inconclusive
    used: tuple[int, ...]
    quarantined: tuple[int, ...]
    config_fingerprint: str
    pilot_fingerprint: str | None = None

    def rows(self) -> list[tuple]:
        return list(zip(self.n_values, self.median, self.p90, self.std, self.se))

    def to_obj(self) -> dict:
        return {
            "statistic": self.statistic,
            "columns": ["n", "median", "p90", "std", "se"],
            "rows": [list(r) for r in self.rows()],
            "verdict": self.verdict,
            "used": list(self.used),
            "quarantined": list(self.quarantined),
            "config_fingerprint": self.config_fingerprint,
            "pilot_fingerprint": self.pilot_fingerprint,
        }


# --- shared helpers -------------------------------------------------------------


def _refuse_if_inadmissible(cfg: ExperimentConfig, require=("q_true", "m_true"), need_density: bool = True):
    ok, reports = approve(cfg.spec, cfg.r)
    if not ok:
        failed = [rep for rep in reports if not rep.satisfied]
        raise RefusalError(
            "experiment refused, conditions fail: "
            + "; ".join(
                f"{rep.condition_name} computed={rep.computed_value:.6g} threshold={rep.threshold:g}"
                for rep in failed
            ),
            reports=failed,
        )
    if cfg.truth is None:
        raise RefusalError("experiment refused: no truth values supplied")
    if require:
        missing = [k for k in require if getattr(cfg.truth, k) is None]
        if missing:
            raise RefusalError(f"experiment refused: truth entries missing: {', '.join(missing)}")
    if need_density and (cfg.truth.f_at_q is None or not cfg.truth.f_at_q > 0):
        raise RefusalError(
            "experiment refused: positive density at the quantile is unverifiable (f_at_q absent or <= 0)"
        )


def _cov_and_se(y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample covariance of rows of y (M, d) with delta-method entry SEs."""
    m = y.shape[0]
    mean = y.mean(axis=0)
    z = y - mean
    cov = (z.T @ z) / (m - 1)
    # Var(cov_ab) ~ (E[(ya zb)^2] - cov_ab^2) / M on centered data
    second = np.einsum("ma,mb->ab", z * z, z * z) / m
    var = np.maximum(second - cov * cov, 0.0) / m
    return mean, cov, np.sqrt(var)


def _moments_z(y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    m = y.shape[0]
    z = y - y.mean(axis=0)
    s = z.std(axis=0, ddof=0)
    skew = (z**3).mean(axis=0) / s**3
    kurt = (z**4).mean(axis=0) / s**4 - 3.0
    return skew, kurt, skew / math.sqrt(6.0 / m), kurt / math.sqrt(24.0 / m)


def _entry_verdicts(cov, se, target: Gamma2 | None, threshold: float, used: int):
    if target is None:
        return None, [["no-target", "no-target"], ["no-target", "no-target"]]
    tgt = target.as_matrix()
    z = np.where(se > 0, np.abs(cov - tgt) / np.where(se > 0, se, 1.0), np.inf)
    scale = np.sqrt(np.outer(np.abs(np.diag(tgt)), np.abs(np.diag(tgt))))
    verdict = []
    for a in range(2):
        row = []
        for b in range(2):
            if used < _MIN_REPS_FOR_VERDICT or se[a, b] > max(scale[a, b], 1e-300):
                row.append("inconclusive")
            elif z[a, b] <= threshold:
                row.append("pass")
            else:
                row.append("fail")
        verdict.append(row)
    return z, verdict


def _config_fingerprint(cfg: ExperimentConfig) -> str:
    import hashlib

    desc = (
        f"{spec_fingerprint(cfg.spec)}|p={cfg.p}|r={cfg.r}|n={cfg.n}|reps={cfg.reps}|"
        f"seed={cfg.seed}|t_grid={cfg.t_grid}|ladder={cfg.n_ladder}|burn={cfg.burn_in}"
    )
    return hashlib.sha256(desc.encode()).hexdigest()[:16]


def _simulate_stats(cfg: ExperimentConfig, n: int, per_rep, width: int, threads: int) -> np.ndarray:
    """Run per_rep(values_row) over M replications into an (M, width) array."""
    out = np.empty((cfg.reps, width))

    def task(start, stop):
        values = simulate_batch(cfg.spec, n, cfg.burn_in, cfg.seed, range(start, stop))
        for row in range(stop - start):
            out[start + row] = per_rep(values[row])

    run_chunked(cfg.reps, task, chunk_size=cfg.chunk_size, threads=threads)
    return out


# --- experiments ------------------------------------------------------------------


def run_clt_experiment(cfg: ExperimentConfig, threads: int = 1) -> CltReport:
    """Empirical covariance of the sqrt(n)-scaled centered pair vs its target."""
    _refuse_if_inadmissible(cfg)
    truth = cfg.truth
    root_n = math.sqrt(cfg.n)

    def per_rep(values):
        return (
            root_n * (sample_quantile(values, cfg.p) - truth.q_true),
            root_n * (centred_abs_moment(values, cfg.r) - truth.m_true),
        )

    y = _simulate_stats(cfg, cfg.n, per_rep, 2, threads)
    finite = np.isfinite(y).all(axis=1)
    used = int(finite.sum())
    quarantined = cfg.reps - used
    if used < 2:
        raise RefusalError("all replications quarantined (non-finite estimates)")
    y = y[finite]
    mean, cov, se = _cov_and_se(y)
    skew, kurt, skew_z, kurt_z = _moments_z(y)
    z, verdict = _entry_verdicts(cov, se, cfg.target, cfg.se_threshold, used)
    return CltReport(
        empirical_mean=mean,
        empirical_cov=cov,
        cov_se=se,
        target=cfg.target,
        per_entry_z=z,
        verdict=verdict,
        marginal_skewness=skew,
        marginal_excess_kurtosis=kurt,
        skewness_z=skew_z,
        kurtosis_z=kurt_z,
        used=used,
        quarantined=quarantined,
        config_fingerprint=_config_fingerprint(cfg),
        pilot_fingerprint=truth.pilot_fingerprint,
    )


def run_fclt_experiment(cfg: ExperimentConfig, threads: int = 1) -> FcltReport:
    """Partial-sum covariances over a t-grid: linear-in-t growth and
    decorrelation of increments over disjoint windows."""
    if not cfg.t_grid:
        raise ParameterError("fclt experiment needs a t_grid")
    _refuse_if_inadmissible(cfg)
    grid = tuple(float(t) for t in cfg.t_grid)
    if grid[-1] != 1.0:
        grid = grid + (1.0,)
    truth = cfg.truth
    root_n = math.sqrt(cfg.n)
    fractions = tuple(math.floor(cfg.n * t) / cfg.n for t in grid)

    def per_rep(values):
        pairs = partial_sum_process(values, cfg.p, cfg.r, grid)
        out = []
        for frac, pair in zip(fractions, pairs):
            out.append(root_n * frac * (pair.q_hat - truth.q_true))
            out.append(root_n * frac * (pair.m_hat - truth.m_true))
        return tuple(out)

    flat = _simulate_stats(cfg, cfg.n, per_rep, 2 * len(grid), threads)
    finite = np.isfinite(flat).all(axis=1)
    used = int(finite.sum())
    quarantined = cfg.reps - used
    if used < 2:
        raise RefusalError("all replications quarantined (non-finite estimates)")
    y = flat[finite].reshape(used, len(grid), 2)

    # per-t covariance and the linear-growth z statistic
    cov_by_t = np.empty((len(grid), 2, 2))
    centered = y - y.mean(axis=0, keepdims=True)
    for i in range(len(grid)):
        cov_by_t[i] = _cov_and_se(y[:, i])[1]
    scaling_z = np.zeros_like(cov_by_t)
    last = centered[:, -1]
    for i, frac in enumerate(fractions):
        u = np.einsum("ma,mb->mab", centered[:, i], centered[:, i]) - frac * np.einsum(
            "ma,mb->mab", last, last
        )
        diff = cov_by_t[i] - frac * cov_by_t[-1]
        se = u.std(axis=0, ddof=1) / math.sqrt(used)
        scaling_z[i] = np.where(se > 0, np.abs(diff) / np.where(se > 0, se, 1.0), 0.0)

    # increments over consecutive windows (t_{w-1}, t_w], starting at t_0 = 0
    inc = np.diff(np.concatenate([np.zeros((used, 1, 2)), y], axis=1), axis=1)
    windows = [[0.0 if w == 0 else grid[w - 1], grid[w]] for w in range(len(grid))]
    pair_idx = [(a, b) for a in range(len(grid)) for b in range(a + 1, len(grid))]
    corr = np.empty((len(pair_idx), 2, 2))
    for k, (a, b) in enumerate(pair_idx):
        za = inc[:, a] - inc[:, a].mean(axis=0)
        zb = inc[:, b] - inc[:, b].mean(axis=0)
        num = np.einsum("ma,mb->ab", za, zb) / used
        den = np.sqrt(np.outer((za * za).mean(axis=0), (zb * zb).mean(axis=0)))
        corr[k] = num / np.where(den > 0, den, 1.0)
    corr_z = corr * math.sqrt(used)

    clt_cfg = cfg
    clt = _clt_from_samples(clt_cfg, y[:, -1, :], used, quarantined)
    return FcltReport(
        t_grid=grid,
        prefix_fractions=fractions,
        cov_by_t=cov_by_t,
        scaling_z=scaling_z,
        increment_corr=corr,
        increment_corr_z=corr_z,
        increment_windows=windows,
        clt=clt,
        used=used,
        quarantined=quarantined,
        config_fingerprint=_config_fingerprint(cfg),
    )


def _clt_from_samples(cfg: ExperimentConfig, y: np.ndarray, used: int, quarantined: int) -> CltReport:
    mean, cov, se = _cov_and_se(y)
    skew, kurt, skew_z, kurt_z = _moments_z(y)
    z, verdict = _entry_verdicts(cov, se, cfg.target, cfg.se_threshold, used)
    return CltReport(
        empirical_mean=mean,
        empirical_cov=cov,
        cov_se=se,
        target=cfg.target,
        per_entry_z=z,
        verdict=verdict,
        marginal_skewness=skew,
        marginal_excess_kurtosis=kurt,
        skewness_z=skew_z,
        kurtosis_z=kurt_z,
        used=used,
        quarantined=quarantined,
        config_fingerprint=_config_fingerprint(cfg),
        pilot_fingerprint=cfg.truth.pilot_fingerprint if cfg.truth else None,
    )


def _decay_verdict(series_list: list[tuple[float, ...]], n_count: int) -> str:
    if n_count < 2:
        return "inconclusive"
    for series in series_list:
        for a, b in zip(series, series[1:]):
            if b > a * (1.0 + _DECAY_SLACK):
                return "fail"
    return "pass"


def _run_ladder(cfg: ExperimentConfig, statistic: str, per_rep_factory, decay_on: str, threads: int) -> DecayTable:
    if not cfg.n_ladder:
        raise ParameterError("ladder experiment needs n_ladder")
    ladder = tuple(int(n) for n in cfg.n_ladder)
    med, p90, std, se, used_n, quar_n = [], [], [], [], [], []
    for n in ladder:
        per_rep = per_rep_factory(n)
        vals = _simulate_stats(cfg, n, per_rep, 1, threads)[:, 0]
        finite = np.isfinite(vals)
        used = int(finite.sum())
        vals = vals[finite]
        a = np.abs(vals)
        med.append(float(np.median(a)))
        p90.append(float(np.percentile(a, 90.0)))
        std.append(float(vals.std(ddof=1)))
        se.append(float(vals.std(ddof=1) / math.sqrt(max(used, 1))))
        used_n.append(used)
        quar_n.append(cfg.reps - used)
    series = {"median+p90": [tuple(med), tuple(p90)], "std": [tuple(std)]}[decay_on]
    return DecayTable(
        statistic=statistic,
        n_values=ladder,
        median=tuple(med),
        p90=tuple(p90),
        std=tuple(std),
        se=tuple(se),
        verdict=_decay_verdict(series, len(ladder)),
        used=tuple(used_n),
        quarantined=tuple(quar_n),
        config_fingerprint=_config_fingerprint(cfg),
        pilot_fingerprint=cfg.truth.pilot_fingerprint if cfg.truth else None,
    )


def run_bahadur_experiment(cfg: ExperimentConfig, threads: int = 1) -> DecayTable:
    """Median and 90th percentile of |sqrt(n) R_n| along the n ladder.

    Pass iff both statistics are non-increasing up to 10 percent slack.
    """
    _refuse_if_inadmissible(cfg, require=("q_true",))
    truth = cfg.truth

    def factory(n):
        root_n = math.sqrt(n)

        def per_rep(values):
            return (root_n * bahadur_remainder(values, cfg.p, truth.q_true, truth.f_at_q),)

        return per_rep

    return _run_ladder(cfg, "sqrt(n) * bahadur remainder", factory, "median+p90", threads)


def run_representation_experiment(cfg: ExperimentConfig, threads: int = 1) -> DecayTable:
    """Spread of the moment-representation residual along the n ladder.

    The residual is o_P(1), not o_P(1/sqrt(n)): the verdict tracks the
    standard deviation decreasing (10 percent slack).
    """
    _refuse_if_inadmissible(cfg, require=("mu", "a_r"), need_density=False)
    truth = cfg.truth

    def factory(n):
        def per_rep(values):
            return (representation_gap(values, cfg.r, truth.mu, truth.a_r),)

        return per_rep

    return _run_ladder(cfg, "moment representation gap", factory, "std", threads)
