import math

import numpy as np
import pytest

from fclt_lab.arma import ArmaSpec
from fclt_lab.errors import NonCausalError, ParameterError
from fclt_lab.garch import AugGarchSpec
from fclt_lab.innovations import InnovationDist
from fclt_lab.ned import (
    Functional,
    estimate_ned,
    fit_decay,
    functional_ned_comparison,
    ned_scan,
)
from fclt_lab.processes import IidSpec

AR1 = ArmaSpec(phi=(-0.5,))
IDENTITY = Functional("identity")


def ar1_exact_nu(k):
    # tail std of sum_{j>k} 0.5^j eps_j = 0.5^(k+1) sqrt(4/3)
    return 0.5 ** (k + 1) * math.sqrt(4.0 / 3.0)


def test_ma1_scan_is_exactly_zero():
    spec = ArmaSpec(theta=(0.3,))
    for k in (1, 2, 4):
        est = estimate_ned(spec, IDENTITY, k, redraws=16, samples=256, seed=3)
        assert est.nu_hat == 0.0 and est.nu_hat_jk == 0.0 and est.se == 0.0


def test_ar1_identity_matches_exact_tail_formula():
    for k in (1, 3, 6):
        est = estimate_ned(AR1, IDENTITY, k, seed=11)
        assert abs(est.nu_hat_jk - ar1_exact_nu(k)) <= 3.0 * est.se, (k, est)


def test_iid_scans_are_zero():
    spec = IidSpec(InnovationDist())
    for fn in (IDENTITY, Functional("abs_pow", 2.0), Functional("indicator_leq", 0.5)):
        est = estimate_ned(spec, fn, 2, redraws=16, samples=512, seed=9)
        assert est.nu_hat_jk <= 3.0 * est.se + 1e-12


def test_scan_monotone_in_k_up_to_3se():
    scan = ned_scan(AR1, IDENTITY, range(1, 7), redraws=32, samples=1024, seed=21)
    for i in range(len(scan.k_values) - 1):
        slack = 3.0 * math.hypot(scan.se[i], scan.se[i + 1])
        assert scan.nu_hat_jk[i + 1] <= scan.nu_hat_jk[i] + slack


def test_fit_decay_geometric_synthetic():
    ks = np.arange(1, 11)
    fit = fit_decay(ks, 0.5**ks)
    assert fit.model == "geometric"
    assert fit.rate == pytest.approx(0.5, rel=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_decay_polynomial_synthetic():
    ks = np.arange(1, 11)
    fit = fit_decay(ks, ks.astype(float) ** -3)
    assert fit.model == "polynomial"
    assert fit.rate == pytest.approx(3.0, rel=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_decay_degenerate_on_zeros():
    fit = fit_decay(np.arange(1, 8), np.zeros(7))
    assert fit.model == "degenerate"


def test_ar1_scan_fits_geometric_rate_half():
    scan = ned_scan(AR1, IDENTITY, range(1, 9), seed=33)
    assert scan.fit.model == "geometric"
    assert scan.fit.rate == pytest.approx(0.5, abs=0.1)


def test_garch_abs2_scan_decays_geometrically():
    spec = AugGarchSpec(model="garch", omega=0.1, alpha=(0.1,), beta=(0.8,))
    scan = ned_scan(spec, Functional("abs_pow", 2.0), range(1, 9), redraws=32, samples=2048, seed=41)
    assert scan.fit.model == "geometric"
    assert scan.fit.r_squared > 0.9
    assert 0.0 < scan.fit.rate < 1.0


def test_functional_comparison_ar1():
    cmp = functional_ned_comparison(AR1, x_threshold=0.5, r=2, k_values=range(1, 7), redraws=32, samples=1024, seed=13)
    assert cmp.degradation_consistent
    # square-root degradation bound: indicator decays no faster than sqrt(nu(k)) ~ rate in [0.5, 0.85]
    ind = cmp.indicator.fit
    assert ind.model == "geometric"
    assert 0.5 <= ind.rate <= 0.85, ind
    assert cmp.abs_pow.fit.model == "geometric"


def test_estimate_ned_rejects_non_causal():
    with pytest.raises(NonCausalError):
        estimate_ned(ArmaSpec(phi=(-1.2,)), IDENTITY, 2, redraws=8, samples=64, seed=1)


def test_estimate_ned_deterministic_and_thread_stable():
    a = estimate_ned(AR1, IDENTITY, 3, redraws=16, samples=512, seed=50, chunk_size=64, threads=1)
    b = estimate_ned(AR1, IDENTITY, 3, redraws=16, samples=512, seed=50, chunk_size=64, threads=4)
    assert a == b


def test_functional_parsing():
    assert Functional.parse("identity") == IDENTITY
    assert Functional.parse("abs_pow:2") == Functional("abs_pow", 2.0)
    assert Functional.parse("indicator_leq:0.5") == Functional("indicator_leq", 0.5)
    with pytest.raises(ParameterError):
        Functional.parse("huber")
