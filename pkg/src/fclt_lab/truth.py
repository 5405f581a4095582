"""True quantile, density, mean and moment values for model-based runs.

Closed forms are used where the marginal law is known exactly (iid laws;
ARMA with iid normal innovations, whose marginal is normal; the variance of a
stationary GARCH). Everything else comes from a high-accuracy Monte Carlo
pilot whose provenance (seed, size, fingerprint) is recorded entry by entry.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .arma import ArmaSpec, causal_ma_coefficients
from .asymptotics import a_r_from_sample, a_r_quadrature, gaussian_kde_at
from .errors import ParameterError
from .garch import AugGarchSpec
from .innovations import InnovationDist
from .parallel import run_chunked
from .processes import IidSpec, ProcessSpec, simulate_batch, spec_fingerprint
from .estimators import sample_quantile

__all__ = ["Truth", "closed_form_truth", "pilot_truth", "truth_from_sample", "resolve_truth"]

PILOT_N = 10_000_000
PILOT_PATHS = 64  # the pilot pools this many independent stationary paths


@dataclass(frozen=True)
class Truth:
    """True values the experiments center and scale by, with provenance tags."""

    q_true: float | None
    f_at_q: float | None
    mu: float | None
    m_true: float | None
    a_r: float | None
    p: float
    r: int
    provenance: dict[str, str] = field(default_factory=dict)
    pilot_fingerprint: str | None = None

    def require(self, *names: str):
        missing = [k for k in names if getattr(self, k) is None]
        if missing:
            raise ParameterError(f"truth entries missing: {', '.join(missing)}")

    def to_obj(self) -> dict:
        return {
            "q_true": self.q_true,
            "f_at_q": self.f_at_q,
            "mu": self.mu,
            "m_true": self.m_true,
            "a_r": self.a_r,
            "p": self.p,
            "r": self.r,
            "provenance": dict(self.provenance),
            "pilot_fingerprint": self.pilot_fingerprint,
        }


def _normal_marginal_truth(sigma_x: float, p: float, r: int) -> Truth:
    q = float(sigma_x * sps.norm.ppf(p))
    f = float(sps.norm.pdf(q / sigma_x) / sigma_x)
    # E|Z|^r = 2^(r/2) Gamma((r+1)/2) / sqrt(pi)
    abs_moment = 2.0 ** (r / 2.0) * math.gamma((r + 1) / 2.0) / math.sqrt(math.pi)
    tags = {k: "closed-form" for k in ("q_true", "f_at_q", "mu", "m_true", "a_r")}
    return Truth(
        q_true=q,
        f_at_q=f,
        mu=0.0,
        m_true=float(sigma_x**r * abs_moment),
        a_r=0.0,  # symmetric marginal
        p=p,
        r=r,
        provenance=tags,
    )


def _arma_marginal_std(spec: ArmaSpec) -> float:
    psi = causal_ma_coefficients(spec, 4000)
    tail = abs(psi[-1])
    total = float(np.dot(psi, psi))
    if tail * tail > 1e-14 * total:
        raise ParameterError("MA coefficients did not decay enough for a closed-form marginal")
    return math.sqrt(total)


def closed_form_truth(spec: ProcessSpec, p: float, r: int) -> Truth | None:
    """Exact truth when the marginal admits one, else None."""
    if isinstance(spec, IidSpec):
        dist = spec.innovation
        if dist.is_discrete:
            return None  # no density: quantile-side truth undefined
        q = float(dist.ppf(p))
        f = float(dist.pdf(q))
        mu = dist.expect(lambda x: x)
        m_true = dist.expect(lambda x: np.abs(x - mu) ** r)
        tags = {k: "closed-form" for k in ("q_true", "f_at_q", "mu", "m_true", "a_r")}
        return Truth(q, f, mu, m_true, a_r_quadrature(dist, r, mu), p, r, provenance=tags)
    if isinstance(spec, ArmaSpec) and isinstance(spec.innovation, InnovationDist):
        if spec.innovation.kind == "standard_normal":
            return _normal_marginal_truth(_arma_marginal_std(spec), p, r)
    return None


def _partial_closed_entries(spec: ProcessSpec, r: int) -> dict[str, float]:
    """Entries known exactly even when the full marginal is not."""
    out: dict[str, float] = {}
    dist = None
    if isinstance(spec, AugGarchSpec):
        dist = spec.innovation
        if dist.is_symmetric:
            out["mu"] = 0.0
            out["a_r"] = 0.0
        if spec.model == "garch" and r == 2:
            persistence = sum(spec.alpha) + sum(spec.beta)
            if persistence < 1.0:
                out["m_true"] = spec.omega / (1.0 - persistence)  # E[X^2], mu = 0
    elif isinstance(spec, ArmaSpec):
        dist = spec.iid_driver
        if dist.is_symmetric:
            out["mu"] = 0.0
            out["a_r"] = 0.0
    return out


def truth_from_sample(values: np.ndarray, p: float, r: int, provenance_tag: str = "sample") -> Truth:
    """Estimate every truth entry from one large stationary sample."""
    x = np.asarray(values, dtype=np.float64).ravel()
    q = sample_quantile(x, p)
    try:
        f = gaussian_kde_at(x, q)
    except Exception:
        f = None
    mu = float(x.mean())
    m_true = float(np.mean(np.abs(x - mu) ** r))
    a_r = a_r_from_sample(x, r, mu)
    tags = {k: provenance_tag for k in ("q_true", "f_at_q", "mu", "m_true", "a_r")}
    return Truth(q, f, mu, m_true, a_r, p, r, provenance=tags)


def pilot_truth(
    spec: ProcessSpec,
    p: float,
    r: int,
    seed=0,
    n: int = PILOT_N,
    burn_in: int | None = None,
) -> Truth:
    """High-accuracy MC pilot: pools independent stationary paths to n draws.

    Entries with exact closed forms (mean / a_r under symmetry, the GARCH
    variance) override the sample estimates, with provenance recorded.
    """
    per_path = max(1, math.ceil(n / PILOT_PATHS))
    values = np.empty((PILOT_PATHS, per_path))

    def task(start, stop):
        values[start:stop] = simulate_batch(spec, per_path, burn_in, seed, range(start, stop))

    run_chunked(PILOT_PATHS, task, chunk_size=8)
    pooled = values.ravel()[:n]
    fp = hashlib.sha256(
        json.dumps(
            {"spec": spec_fingerprint(spec), "seed": str(seed), "n": n, "paths": PILOT_PATHS},
            sort_keys=True,
        ).encode()
    ).hexdigest()[:16]
    tag = f"pilot-mc(n={n}, seed={seed}, fingerprint={fp})"
    est = truth_from_sample(pooled, p, r, provenance_tag=tag)

    entries = est.to_obj()
    for key, val in _partial_closed_entries(spec, r).items():
        entries[key] = val
        entries["provenance"][key] = "closed-form"
    return Truth(
        q_true=entries["q_true"],
        f_at_q=entries["f_at_q"],
        mu=entries["mu"],
        m_true=entries["m_true"],
        a_r=entries["a_r"],
        p=p,
        r=r,
        provenance=entries["provenance"],
        pilot_fingerprint=fp,
    )


def resolve_truth(spec: ProcessSpec, p: float, r: int, seed=0, pilot_n: int = PILOT_N) -> Truth:
    """Closed-form truth when available, MC pilot otherwise."""
    exact = closed_form_truth(spec, p, r)
    if exact is not None:
        return exact
    return pilot_truth(spec, p, r, seed=seed, n=pilot_n)
