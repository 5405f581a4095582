"""Process specifications, seeded simulation entry points and file formats.

A ProcessSpec is one of IidSpec, AugGarchSpec or ArmaSpec. Simulation is a
pure function of (spec, n, burn_in, seed): identical inputs reproduce the
Path bit-exactly on any thread count.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .arma import ArmaSpec, arma_values_from_innovations
from .errors import ParameterError
from .garch import AugGarchSpec, default_burn_in, garch_values_from_innovations
from .innovations import InnovationDist
from .rng import seed_key, stream_generator

__all__ = [
    "IidSpec",
    "ProcessSpec",
    "Path",
    "simulate",
    "simulate_iid",
    "simulate_augmented_garch",
    "simulate_arma",
    "values_from_innovations",
    "innovation_driver",
    "spec_to_json",
    "spec_from_json",
    "spec_fingerprint",
    "path_to_csv",
    "path_from_csv",
]


@dataclass(frozen=True)
class IidSpec:
    """An iid sequence drawn from one innovation law."""

    innovation: InnovationDist = field(default_factory=InnovationDist)


ProcessSpec = Union[IidSpec, AugGarchSpec, ArmaSpec]


@dataclass(frozen=True)
class Path:
    """One simulated realization with its reproducibility metadata."""

    values: np.ndarray
    spec_fingerprint: str
    seed: tuple[int, ...]
    burn_in: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "seed", seed_key(self.seed))

    @property
    def n(self) -> int:
        return int(self.values.shape[-1])

    def __len__(self) -> int:
        return self.n


# --- serialization ----------------------------------------------------------


def _innovation_to_obj(dist: InnovationDist) -> dict:
    obj = {"kind": dist.kind}
    if dist.dof is not None:
        obj["dof"] = dist.dof
    return obj


def _innovation_from_obj(obj: dict) -> InnovationDist:
    return InnovationDist(kind=obj["kind"], dof=obj.get("dof"))


def spec_to_obj(spec: ProcessSpec) -> dict:
    if isinstance(spec, IidSpec):
        return {"model": "iid", "innovation": _innovation_to_obj(spec.innovation)}
    if isinstance(spec, AugGarchSpec):
        if spec.model == "generic":
            raise ParameterError("generic augmented-GARCH specs are not JSON-serializable")
        return {
            "model": spec.model,
            "lambda": "log" if spec.is_exponential else "power",
            "delta": spec.delta,
            "p": spec.p,
            "q": spec.q,
            "omega": spec.omega,
            "alpha": list(spec.alpha),
            "beta": list(spec.beta),
            "gamma": list(spec.gamma),
            "innovation": _innovation_to_obj(spec.innovation),
        }
    if isinstance(spec, ArmaSpec):
        if isinstance(spec.innovation, AugGarchSpec):
            innovation = spec_to_obj(spec.innovation)
        else:
            innovation = _innovation_to_obj(spec.innovation)
        return {
            "model": "arma",
            "phi": list(spec.phi),
            "theta": list(spec.theta),
            "innovation": innovation,
        }
    raise ParameterError(f"unknown spec type {type(spec).__name__}")


def spec_from_obj(obj: dict) -> ProcessSpec:
    model = obj.get("model")
    if model == "iid":
        return IidSpec(innovation=_innovation_from_obj(obj["innovation"]))
    if model == "arma":
        inn = obj["innovation"]
        if "model" in inn:
            innovation = spec_from_obj(inn)
            if not isinstance(innovation, AugGarchSpec):
                raise ParameterError("ARMA innovation spec must be a garch model")
        else:
            innovation = _innovation_from_obj(inn)
        return ArmaSpec(phi=tuple(obj.get("phi", ())), theta=tuple(obj.get("theta", ())), innovation=innovation)
    return AugGarchSpec(
        model=model,
        p=int(obj.get("p", 1)),
        q=int(obj.get("q", 0)),
        omega=float(obj.get("omega", 0.0)),
        alpha=tuple(obj.get("alpha", ())),
        beta=tuple(obj.get("beta", ())),
        gamma=tuple(obj.get("gamma", ())),
        delta=obj.get("delta"),
        innovation=_innovation_from_obj(obj["innovation"]),
    )


def spec_to_json(spec: ProcessSpec) -> str:
    return json.dumps(spec_to_obj(spec), sort_keys=True, separators=(",", ":"))


def spec_from_json(text: str) -> ProcessSpec:
    return spec_from_obj(json.loads(text))


def spec_fingerprint(spec: ProcessSpec) -> str:
    try:
        canonical = spec_to_json(spec)
    except ParameterError:
        canonical = repr(spec)  # generic callables: repr-based, not portable
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


# --- simulation ---------------------------------------------------------------


def innovation_driver(spec: ProcessSpec) -> InnovationDist:
    """The iid law at the bottom of the causal representation."""
    if isinstance(spec, IidSpec):
        return spec.innovation
    if isinstance(spec, AugGarchSpec):
        return spec.innovation
    if isinstance(spec, ArmaSpec):
        return spec.iid_driver
    raise ParameterError(f"unknown spec type {type(spec).__name__}")


def values_from_innovations(spec: ProcessSpec, eps: np.ndarray, strict: bool = True) -> np.ndarray:
    """Evaluate the causal functional over given driver innovations.

    ``eps`` has shape (..., T); the output drops the GARCH pre-window where
    applicable. This is the deterministic core shared by the seeded
    simulators and the coupling estimator of the NED diagnostics. With
    ``strict=False`` diverging volatility states give NaN rows instead of
    raising, so batch callers can quarantine them.
    """
    if isinstance(spec, IidSpec):
        return np.asarray(eps, dtype=np.float64)
    if isinstance(spec, AugGarchSpec):
        return garch_values_from_innovations(spec, eps, strict=strict)
    if isinstance(spec, ArmaSpec):
        if isinstance(spec.innovation, AugGarchSpec):
            inner = garch_values_from_innovations(spec.innovation, eps, strict=strict)
        else:
            inner = np.asarray(eps, dtype=np.float64)
        return arma_values_from_innovations(spec, inner)
    raise ParameterError(f"unknown spec type {type(spec).__name__}")


def pre_window(spec: ProcessSpec) -> int:
    """Number of leading innovations consumed before the first output value."""
    if isinstance(spec, AugGarchSpec):
        return spec.pre_window
    if isinstance(spec, ArmaSpec) and isinstance(spec.innovation, AugGarchSpec):
        return spec.innovation.pre_window
    return 0


def simulate_iid(dist: InnovationDist, n: int, seed) -> Path:
    if n < 1:
        raise ParameterError("n must be >= 1")
    rng = stream_generator(seed)
    values = dist.sample(rng, n)
    return Path(values, spec_fingerprint(IidSpec(dist)), seed_key(seed), 0)


def simulate_augmented_garch(spec: AugGarchSpec, n: int, burn_in: int | None = None, seed=0) -> Path:
    if n < 1:
        raise ParameterError("n must be >= 1")
    if burn_in is None:
        burn_in = default_burn_in(spec)
    if burn_in < 0:
        raise ParameterError("burn_in must be >= 0")
    rng = stream_generator(seed)
    eps = spec.innovation.sample(rng, spec.pre_window + burn_in + n)
    values = garch_values_from_innovations(spec, eps)[burn_in:]
    return Path(values, spec_fingerprint(spec), seed_key(seed), burn_in)


def simulate_arma(spec: ArmaSpec, n: int, burn_in: int | None = None, seed=0) -> Path:
    if n < 1:
        raise ParameterError("n must be >= 1")
    spec.require_causal()
    if burn_in is None:
        burn_in = max(default_burn_in(spec), 0)
    if burn_in < 0:
        raise ParameterError("burn_in must be >= 0")
    rng = stream_generator(seed)
    total = pre_window(spec) + burn_in + n
    eps = innovation_driver(spec).sample(rng, total)
    values = values_from_innovations(spec, eps)[burn_in:]
    return Path(values, spec_fingerprint(spec), seed_key(seed), burn_in)


def simulate(spec: ProcessSpec, n: int, burn_in: int | None = None, seed=0) -> Path:
    """Seeded simulation dispatch for any ProcessSpec."""
    if isinstance(spec, IidSpec):
        return simulate_iid(spec.innovation, n, seed)
    if isinstance(spec, AugGarchSpec):
        return simulate_augmented_garch(spec, n, burn_in, seed)
    if isinstance(spec, ArmaSpec):
        return simulate_arma(spec, n, burn_in, seed)
    raise ParameterError(f"unknown spec type {type(spec).__name__}")


def simulate_batch(spec: ProcessSpec, n: int, burn_in: int | None, seed, reps: range) -> np.ndarray:
    """Simulate a batch of replications, row r from stream (seed, r).

    Row r is produced from the same innovation stream a single run with
    seed=(seed, r) would use; the rows are stacked and the recursion runs
    vectorized across the batch.
    """
    if isinstance(spec, IidSpec):
        burn = 0
    elif burn_in is None:
        burn = default_burn_in(spec)
    else:
        burn = burn_in
    if isinstance(spec, ArmaSpec):
        spec.require_causal()
    total = pre_window(spec) + burn + n
    dist = innovation_driver(spec)
    eps = np.empty((len(reps), total))
    for row, rep in enumerate(reps):
        eps[row] = dist.sample(stream_generator(seed, rep), total)
    # non-strict: a diverging replication becomes a NaN row for quarantining
    return values_from_innovations(spec, eps, strict=False)[:, burn:]


# --- CSV ---------------------------------------------------------------------


def path_to_csv(path_or_values, fileobj, comments: list[str] | None = None):
    """Write a single-column CSV with header ``x`` (LF line endings).

    ``comments`` become leading ``#`` lines (used by the CLI to reference the
    run manifest); the toolkit's readers skip them.
    """
    values = getattr(path_or_values, "values", path_or_values)
    lines = [f"# {c}" for c in (comments or [])]
    lines.append("x")
    lines.extend(repr(float(v)) for v in np.asarray(values).ravel())
    fileobj.write("\n".join(lines) + "\n")


def path_from_csv(fileobj) -> np.ndarray:
    """Read a single-column CSV produced by path_to_csv (skips # comments)."""
    values = []
    header_seen = False
    for raw in fileobj:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != "x":
                raise ParameterError(f"expected header 'x', got {line!r}")
            header_seen = True
            continue
        values.append(float(line))
    if not header_seen:
        raise ParameterError("missing CSV header 'x'")
    return np.asarray(values, dtype=np.float64)
