"""Theoretical targets: long-run covariances, the 2x2 limit matrix, and the
remainder terms of the two asymptotic representations.

The trivariate long-run covariance collects, for the component series
(X_t, |X_t|^r, ind(X_t <= q)), the lag-0 covariance plus twice the summed
autocovariances, with the indicator row and column scaled by -1/f(q). The
2x2 limit matrix of the joint (quantile, centred-moment) asymptotics is the
congruence Gamma = A Sigma A^T with A = [[0, 0, 1], [-a_r, 1, 0]] and
a_r = r E[X^(r-1) sgn(X)^r].

Remainders: the quantile linearization residual
R_n = q_n(p) - q - (p - F_n(q)) / f(q) is o_P(1/sqrt(n)); the moment
representation residual
sqrt(n) (m_hat - known-mean moment + (mean - mu) a_r) is o_P(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conditions import approve
from .errors import ParameterError, RefusalError, SingularityError
from .estimators import (
    centred_abs_moment,
    empirical_cdf,
    known_mean_abs_moment,
    sample_mean,
    sample_quantile,
)
from .innovations import InnovationDist
from .parallel import DEFAULT_CHUNK, run_chunked
from .processes import ProcessSpec, simulate_batch

__all__ = [
    "Gamma2",
    "TrivariateLRC",
    "a_r_quadrature",
    "a_r_from_sample",
    "iid_gamma",
    "gamma_from_trivariate",
    "gamma_target_with_se",
    "trivariate_iid_closed_form",
    "trivariate_long_run_cov_mc",
    "trivariate_long_run_cov_hac",
    "bahadur_remainder",
    "representation_gap",
    "silverman_bandwidth",
    "gaussian_kde_at",
]

_NEAR_SINGULAR_RATIO = 1e-10


@dataclass(frozen=True)
class Gamma2:
    """2x2 asymptotic covariance of the (quantile, centred moment) pair."""

    g11: float
    g22: float
    g12: float
    a_r: float

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.g11, self.g12], [self.g12, self.g22]])

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.as_matrix()).min())

    def to_obj(self) -> dict:
        return {"gamma": self.as_matrix().tolist(), "a_r": self.a_r}


@dataclass(frozen=True)
class TrivariateLRC:
    """3x3 long-run covariance of the component series (value, power, indicator)."""

    sigma: np.ndarray  # 3x3, indicator row/col already scaled by -1/f
    truncation_lag: int
    method: str  # iid_closed_form | replication_mc | hac_bartlett
    f_at_q: float
    q_true: float
    p: float
    r: int
    mc_se: np.ndarray | None = None
    rep_sigma: np.ndarray | None = None  # per-replication estimates (replication_mc)
    tail_bound: float | None = None  # estimated mass of the truncated lags
    note: str | None = None

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=np.float64)
        if sigma.shape != (3, 3):
            raise ParameterError(f"sigma must be 3x3, got {sigma.shape}")
        if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(sigma).max()))):
            raise ParameterError("sigma must be symmetric")
        if not self.f_at_q > 0:
            raise SingularityError(f"f_at_q must be > 0, got {self.f_at_q}")
        object.__setattr__(self, "sigma", sigma)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.sigma).min())

    def is_near_singular(self) -> bool:
        eig = np.linalg.eigvalsh(self.sigma)
        return bool(eig.min() < _NEAR_SINGULAR_RATIO * max(eig.max(), 1e-300))

    def to_obj(self) -> dict:
        return {
            "sigma": self.sigma.tolist(),
            "truncation": self.truncation_lag,
            "method": self.method,
            "f_at_q": self.f_at_q,
            "q_true": self.q_true,
            "p": self.p,
            "r": self.r,
            "mc_se": None if self.mc_se is None else np.asarray(self.mc_se).tolist(),
            "tail_bound": self.tail_bound,
            "note": self.note,
        }


# --- coefficient a_r -----------------------------------------------------------


def _a_r_transform(r: int, mu: float = 0.0):
    def h(x):
        d = np.asarray(x, dtype=float) - mu
        return r * d ** (r - 1) * np.sign(d) ** r

    return h


def a_r_quadrature(dist: InnovationDist, r: int, mu: float = 0.0) -> float:
    """a_r = r E[(X-mu)^(r-1) sgn(X-mu)^r] for an innovation-law marginal."""
    if r < 1:
        raise ParameterError("r must be a positive integer")
    if dist.is_symmetric and mu == 0.0:
        return 0.0  # odd integrand under a symmetric law
    return dist.expect(_a_r_transform(r, mu))


def a_r_from_sample(values, r: int, mu: float = 0.0) -> float:
    h = _a_r_transform(r, mu)
    return float(np.mean(h(np.asarray(values, dtype=float))))


# --- iid closed form -----------------------------------------------------------


def iid_gamma(dist: InnovationDist, p: float, r: int, q_true: float | None = None, f_at_q: float | None = None) -> Gamma2:
    """Limit covariance for an iid sample from ``dist``, by quadrature.

    Entries: g11 = p(1-p)/f^2; g22 = a^2 Var(X) + Var(|X|^r) - 2a Cov(X, |X|^r);
    g12 = (a Cov(ind, X) - Cov(ind, |X|^r)) / f with ind = 1(X <= q).
    """
    if not 0 < p < 1:
        raise ParameterError("p must lie in (0,1)")
    if r < 1:
        raise ParameterError("r must be a positive integer")
    if dist.is_discrete:
        raise SingularityError("iid closed form needs a continuous law with positive density")
    q = float(dist.ppf(p)) if q_true is None else float(q_true)
    f = float(dist.pdf(q)) if f_at_q is None else float(f_at_q)
    if not f > 0:
        raise SingularityError(f"density at the quantile must be > 0, got {f}")

    mu = dist.expect(lambda x: x)
    ex2 = dist.expect(np.square)
    sigma2 = ex2 - mu * mu
    m_r = dist.expect(lambda x: np.abs(x) ** r)
    m_2r = dist.expect(lambda x: np.abs(x) ** (2 * r))
    var_abs = m_2r - m_r * m_r
    a = a_r_quadrature(dist, r)
    cov_x_absr = dist.expect(lambda x: x * np.abs(x) ** r) - mu * m_r
    cov_ind_x = _partial_expect(dist, lambda x: x, q) - p * mu
    cov_ind_absr = _partial_expect(dist, lambda x: np.abs(x) ** r, q) - p * m_r

    g11 = p * (1.0 - p) / (f * f)
    g22 = a * a * sigma2 + var_abs - 2.0 * a * cov_x_absr
    g12 = (a * cov_ind_x - cov_ind_absr) / f
    return Gamma2(g11=float(g11), g22=float(g22), g12=float(g12), a_r=float(a))


def _partial_expect(dist: InnovationDist, h, upper: float) -> float:
    """E[h(X) 1(X <= upper)] via quadrature split at 0 / enumeration."""
    if dist.is_discrete:
        return 0.5 * sum(float(h(x)) for x in (-1.0, 1.0) if x <= upper)

    def clipped(x):
        return np.where(np.asarray(x) <= upper, h(x), 0.0)

    # integrate only below the cutoff; keep the split at 0 for kink safety
    lo, hi = dist.support()
    cut = min(upper, hi)
    if cut <= lo:
        return 0.0
    total = 0.0
    from .innovations import _quad_piece  # shared adaptive quadrature core

    pieces = [(lo, min(0.0, cut))] + ([(0.0, cut)] if cut > 0.0 else [])
    for a, b in pieces:
        if b <= a:
            continue
        val, _ = _quad_piece(lambda x: float(h(x)) * float(dist.pdf(x)), a, b)
        total += val
    return total


def trivariate_iid_closed_form(
    dist: InnovationDist, p: float, r: int, q_true: float | None = None, f_at_q: float | None = None
) -> TrivariateLRC:
    """Exact trivariate covariance for an iid marginal (all lag terms vanish)."""
    if dist.is_discrete:
        raise SingularityError("iid closed form needs a continuous law with positive density")
    q = float(dist.ppf(p)) if q_true is None else float(q_true)
    f = float(dist.pdf(q)) if f_at_q is None else float(f_at_q)
    if not f > 0:
        raise SingularityError(f"density at the quantile must be > 0, got {f}")
    mu = dist.expect(lambda x: x)
    var_x = dist.expect(np.square) - mu * mu
    m_r = dist.expect(lambda x: np.abs(x) ** r)
    var_abs = dist.expect(lambda x: np.abs(x) ** (2 * r)) - m_r * m_r
    cov_x_absr = dist.expect(lambda x: x * np.abs(x) ** r) - mu * m_r
    cov_ind_x = _partial_expect(dist, lambda x: x, q) - p * mu
    cov_ind_absr = _partial_expect(dist, lambda x: np.abs(x) ** r, q) - p * m_r
    sigma = np.array(
        [
            [var_x, cov_x_absr, -cov_ind_x / f],
            [cov_x_absr, var_abs, -cov_ind_absr / f],
            [-cov_ind_x / f, -cov_ind_absr / f, p * (1.0 - p) / (f * f)],
        ]
    )
    return TrivariateLRC(
        sigma=sigma,
        truncation_lag=0,
        method="iid_closed_form",
        f_at_q=f,
        q_true=q,
        p=float(p),
        r=int(r),
        note=_singularity_note(sigma),
    )


# --- congruence to the 2x2 limit -------------------------------------------------


def _congruence(sigma: np.ndarray, a_r: float) -> np.ndarray:
    A = np.array([[0.0, 0.0, 1.0], [-a_r, 1.0, 0.0]])
    return A @ sigma @ A.T


def gamma_from_trivariate(lrc: TrivariateLRC, a_r: float) -> Gamma2:
    """Map the trivariate long-run covariance to the 2x2 limit matrix."""
    g = _congruence(lrc.sigma, a_r)
    return Gamma2(g11=float(g[0, 0]), g22=float(g[1, 1]), g12=float(g[0, 1]), a_r=float(a_r))


def gamma_target_with_se(lrc: TrivariateLRC, a_r: float) -> tuple[Gamma2, np.ndarray]:
    """Gamma target plus per-entry MC standard errors (replication-MC input)."""
    gamma = gamma_from_trivariate(lrc, a_r)
    if lrc.rep_sigma is None:
        raise ParameterError("per-replication estimates are only available from replication MC")
    reps = np.asarray(lrc.rep_sigma)
    A = np.array([[0.0, 0.0, 1.0], [-a_r, 1.0, 0.0]])
    mapped = np.einsum("ai,rij,bj->rab", A, reps, A)
    se = mapped.std(axis=0, ddof=1) / math.sqrt(mapped.shape[0])
    return gamma, se


# --- replication-MC trivariate long-run covariance --------------------------------


def _component_series(values: np.ndarray, r: int, q: float) -> np.ndarray:
    """Stack (X, |X|^r, ind(X <= q)) along a new axis -2. values: (..., n)."""
    absr = np.abs(values) ** r if r != 1 else np.abs(values)
    ind = (values <= q).astype(np.float64)
    return np.stack([values, absr, ind], axis=-2)


def _long_run_sum(
    series: np.ndarray, max_lag: int, weights: np.ndarray | None = None, lag_out: np.ndarray | None = None
) -> np.ndarray:
    """Truncated long-run covariance of centered series (..., 3, n).

    The uniform n/(n-1) factor removes the lag-0 bias from mean estimation
    (exact for independent data) without breaking positive semi-definiteness.
    ``lag_out`` (max_lag+1, 3, 3), when given, accumulates the per-lag
    covariance matrices summed over the batch (for tail-decay fitting).
    """
    n = series.shape[-1]
    mean = series.mean(axis=-1, keepdims=True)
    s = series - mean
    out = np.einsum("...at,...bt->...ab", s, s) / n
    if lag_out is not None:
        lag_out[0] += out.reshape(-1, 3, 3).sum(axis=0)
    for i in range(1, min(max_lag, n - 1) + 1):
        g = np.einsum("...at,...bt->...ab", s[..., i:], s[..., : n - i]) / n
        if lag_out is not None:
            lag_out[i] += g.reshape(-1, 3, 3).sum(axis=0)
        w = 1.0 if weights is None else float(weights[i])
        out = out + w * (g + np.swapaxes(g, -1, -2))
    return out * (n / (n - 1.0))


def _geometric_tail_bound(lag_norms: np.ndarray) -> float | None:
    """Extrapolate sum_{i > L} |cov(i)| from a geometric fit of the lag decay.

    Only lags whose magnitude clears the MC noise floor (taken from the last
    lags) inform the fit; when the covariances die out before the cutoff the
    truncated mass is reported as 0.
    """
    L = lag_norms.shape[0] - 1
    if L < 5:
        return None
    noise_floor = float(np.median(lag_norms[-5:]))
    norms = lag_norms[1:]
    keep = norms > max(3.0 * noise_floor, 1e-300)
    if keep.sum() < 4:
        return 0.0  # decayed below MC noise well before the cutoff
    k = np.arange(1, L + 1, dtype=float)[keep]
    slope, intercept = np.polyfit(k, np.log(norms[keep]), 1)
    rho = math.exp(slope)
    if not 0.0 < rho < 1.0:
        return None  # no geometric decay visible
    at_cutoff = math.exp(intercept + slope * L)
    return 2.0 * at_cutoff * rho / (1.0 - rho)  # both sides of the symmetrized sum


def _scale_indicator_row(sigma: np.ndarray, f_at_q: float) -> np.ndarray:
    d = np.array([1.0, 1.0, -1.0 / f_at_q])
    return sigma * np.einsum("a,b->ab", d, d)


def _singularity_note(sigma: np.ndarray) -> str | None:
    eig = np.linalg.eigvalsh(0.5 * (sigma + sigma.T))
    if eig.min() < _NEAR_SINGULAR_RATIO * max(eig.max(), 1e-300):
        return "near-singular long-run covariance"
    return None


def trivariate_long_run_cov_mc(
    spec: ProcessSpec,
    p: float,
    r: int,
    q_true: float,
    f_at_q: float,
    max_lag: int = 50,
    n_per_rep: int = 10_000,
    n_reps: int = 400,
    seed=0,
    burn_in: int | None = None,
    check_conditions: bool = True,
    chunk_size: int = DEFAULT_CHUNK,
    threads: int = 1,
) -> TrivariateLRC:
    """Replication-MC estimate of the trivariate long-run covariance.

    Simulates ``n_reps`` independent paths (stream (seed, rep)), forms the
    truncated lagged-covariance sums of the three component series per path,
    and averages; per-entry MC standard errors come from the spread across
    replications. Refuses inadmissible specs, citing the failed reports.
    """
    if max_lag < 0:
        raise ParameterError("max_lag must be >= 0")
    if n_reps < 2:
        raise ParameterError("n_reps must be >= 2")
    if not f_at_q > 0:
        raise SingularityError(f"f_at_q must be > 0, got {f_at_q}")
    if check_conditions:
        ok, reports = approve(spec, r)
        if not ok:
            failed = [rep for rep in reports if not rep.satisfied]
            raise RefusalError(
                "spec fails the admissibility conditions: "
                + "; ".join(f"{rep.condition_name}={rep.computed_value:.6g}" for rep in failed),
                reports=failed,
            )

    rep_sigma = np.empty((n_reps, 3, 3))
    n_chunks = (n_reps + chunk_size - 1) // chunk_size
    lag_acc = np.zeros((n_chunks, max_lag + 1, 3, 3))  # per-chunk slots keep threads race-free

    def task(start, stop):
        values = simulate_batch(spec, n_per_rep, burn_in, seed, range(start, stop))
        series = _component_series(values, r, q_true)
        rep_sigma[start:stop] = _long_run_sum(series, max_lag, lag_out=lag_acc[start // chunk_size])

    run_chunked(n_reps, task, chunk_size=chunk_size, threads=threads)
    lag_means = lag_acc.sum(axis=0) / n_reps
    tail_bound = _geometric_tail_bound(np.linalg.norm(lag_means, axis=(1, 2))) if max_lag >= 5 else None

    rep_scaled = _scale_indicator_row(rep_sigma, f_at_q)
    sigma = rep_scaled.mean(axis=0)
    sigma = 0.5 * (sigma + sigma.T)
    mc_se = rep_scaled.std(axis=0, ddof=1) / math.sqrt(n_reps)
    return TrivariateLRC(
        sigma=sigma,
        truncation_lag=max_lag,
        method="replication_mc",
        f_at_q=float(f_at_q),
        q_true=float(q_true),
        p=float(p),
        r=int(r),
        mc_se=mc_se,
        rep_sigma=rep_scaled,
        tail_bound=tail_bound,
        note=_singularity_note(sigma),
    )


# --- single-path HAC estimator -----------------------------------------------------


def silverman_bandwidth(values: np.ndarray) -> float:
    x = np.asarray(values, dtype=float)
    n = x.shape[0]
    std = float(np.std(x, ddof=1)) if n > 1 else 0.0
    q75, q25 = np.percentile(x, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = min(std, iqr / 1.34) if iqr > 0 else std
    return 0.9 * spread * n ** (-0.2)


def gaussian_kde_at(values: np.ndarray, x: float, bandwidth: float | None = None) -> float:
    v = np.asarray(values, dtype=float)
    h = silverman_bandwidth(v) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise SingularityError("degenerate density estimate: zero kernel bandwidth")
    z = (x - v) / h
    return float(np.exp(-0.5 * z * z).sum() / (v.shape[0] * h * math.sqrt(2.0 * math.pi)))


def trivariate_long_run_cov_hac(path_or_values, p: float, r: int, bandwidth: int | None = None) -> TrivariateLRC:
    """Bartlett-kernel long-run covariance from a single path.

    Uses the sample quantile and a Gaussian-kernel density estimate in place
    of the unknown q and f(q); PSD by construction of the Bartlett weights.
    """
    values = np.asarray(getattr(path_or_values, "values", path_or_values), dtype=np.float64)
    n = values.shape[0]
    if bandwidth is None:
        bandwidth = int(n ** (1.0 / 3.0))
    if bandwidth < 0:
        raise ParameterError("bandwidth must be >= 0")
    if bandwidth > 0 and n < 10 * bandwidth:
        raise ParameterError(f"need n >= 10*bandwidth, got n={n}, bandwidth={bandwidth}")
    q_hat = sample_quantile(values, p)
    f_hat = gaussian_kde_at(values, q_hat)
    if not f_hat > 0:
        raise SingularityError("degenerate density estimate at the sample quantile")
    weights = 1.0 - np.arange(bandwidth + 1) / (bandwidth + 1.0)
    series = _component_series(values[None, :], r, q_hat)[0]
    sigma = _long_run_sum(series, bandwidth, weights=weights)
    sigma = _scale_indicator_row(sigma, f_hat)
    sigma = 0.5 * (sigma + sigma.T)
    note = "q and f estimated from the path"
    singular = _singularity_note(sigma)
    if singular:
        note = f"{note}; {singular}"
    return TrivariateLRC(
        sigma=sigma,
        truncation_lag=bandwidth,
        method="hac_bartlett",
        f_at_q=f_hat,
        q_true=q_hat,
        p=float(p),
        r=int(r),
        note=note,
    )


# --- remainder terms ---------------------------------------------------------------


def bahadur_remainder(path_or_values, p: float, q_true: float, f_at_q: float) -> float:
    """Residual of the quantile linearization q_n(p) ~ q + (p - F_n(q)) / f(q).

    R_n = q_n(p) - q - (p - F_n(q)) / f(q), which is o_P(1/sqrt(n)) under the
    theory; the subtraction orientation is the one the limit argument uses
    (the indicator average plus the remainder reconstructs q_n(p) - q).
    """
    if not f_at_q > 0:
        raise SingularityError(f"f_at_q must be > 0, got {f_at_q}")
    values = np.asarray(getattr(path_or_values, "values", path_or_values), dtype=np.float64)
    q_hat = sample_quantile(values, p)
    return q_hat - q_true - (p - empirical_cdf(values, q_true)) / f_at_q


def representation_gap(path_or_values, r: int, mu_true: float, a_r_true: float) -> float:
    """sqrt(n) residual of the known-mean representation of the moment estimator."""
    values = np.asarray(getattr(path_or_values, "values", path_or_values), dtype=np.float64)
    n = values.shape[0]
    m_hat = centred_abs_moment(values, r)
    m_known = known_mean_abs_moment(values, r, mu_true)
    mean = sample_mean(values)
    return math.sqrt(n) * (m_hat - m_known + (mean - mu_true) * a_r_true)
