import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fclt_lab.asymptotics import (
    Gamma2,
    TrivariateLRC,
    bahadur_remainder,
    gamma_from_trivariate,
    iid_gamma,
    representation_gap,
    trivariate_iid_closed_form,
    trivariate_long_run_cov_hac,
    trivariate_long_run_cov_mc,
)
from fclt_lab.arma import ArmaSpec
from fclt_lab.errors import RefusalError, SingularityError
from fclt_lab.garch import AugGarchSpec
from fclt_lab.innovations import InnovationDist
from fclt_lab.processes import IidSpec, simulate
from fclt_lab.rng import stream_generator

NORMAL = InnovationDist()


# --- iid closed form -----------------------------------------------------------


def test_iid_gamma_normal_median_variance():
    g = iid_gamma(NORMAL, 0.5, 2)
    assert g.g11 == pytest.approx(math.pi / 2, rel=1e-9)
    assert g.g22 == pytest.approx(2.0, rel=1e-8)  # Var(X^2) for standard normal
    assert g.g12 == pytest.approx(0.0, abs=1e-9)  # symmetry
    assert g.a_r == 0.0


def test_iid_gamma_rejects_zero_density():
    with pytest.raises(SingularityError):
        iid_gamma(NORMAL, 0.5, 2, q_true=0.0, f_at_q=0.0)
    with pytest.raises(SingularityError):
        iid_gamma(InnovationDist("rademacher"), 0.5, 2)


def test_iid_trivariate_closed_form_reproduces_iid_gamma():
    for p, r in ((0.5, 2), (0.95, 1), (0.25, 3)):
        lrc = trivariate_iid_closed_form(NORMAL, p, r)
        direct = iid_gamma(NORMAL, p, r)
        mapped = gamma_from_trivariate(lrc, direct.a_r)
        assert mapped.g11 == pytest.approx(direct.g11, rel=1e-12, abs=1e-12)
        assert mapped.g22 == pytest.approx(direct.g22, rel=1e-12, abs=1e-12)
        assert mapped.g12 == pytest.approx(direct.g12, rel=1e-12, abs=1e-12)


# --- congruence mapping -----------------------------------------------------------


def _lrc_from_sigma(sigma, f=1.0):
    return TrivariateLRC(
        sigma=np.asarray(sigma, dtype=float),
        truncation_lag=0,
        method="iid_closed_form",
        f_at_q=f,
        q_true=0.0,
        p=0.5,
        r=2,
    )


def test_gamma_mapping_zero_coefficient():
    sigma = np.array([[2.0, 0.3, 0.1], [0.3, 1.5, -0.2], [0.1, -0.2, 0.8]])
    g = gamma_from_trivariate(_lrc_from_sigma(sigma), 0.0)
    assert g.g22 == sigma[1, 1]  # Var(V)
    assert g.g12 == sigma[1, 2]  # Cov(V, W)
    assert g.g11 == sigma[2, 2]  # Var(W)


def test_gamma_mapping_identity_input():
    # A Sigma A^T with Sigma = I and a_r = 1: rows (0,0,1) and (-1,1,0)
    g = gamma_from_trivariate(_lrc_from_sigma(np.eye(3)), 1.0)
    assert (g.g11, g.g22, g.g12) == (1.0, 2.0, 0.0)


def test_gamma_g11_depends_only_on_w_block():
    sigma = np.array([[2.0, 0.3, 0.1], [0.3, 1.5, -0.2], [0.1, -0.2, 0.8]])
    base = gamma_from_trivariate(_lrc_from_sigma(sigma), 0.7).g11
    bumped = sigma.copy()
    bumped[0, 0] += 5.0
    bumped[1, 1] += 2.0
    bumped[0, 1] = bumped[1, 0] = 0.9
    assert gamma_from_trivariate(_lrc_from_sigma(bumped), 0.7).g11 == base


@given(
    st.lists(st.floats(min_value=-2, max_value=2), min_size=9, max_size=9),
    st.floats(min_value=-3, max_value=3),
)
@settings(max_examples=60)
def test_congruence_preserves_psd(flat, a_r):
    b = np.array(flat).reshape(3, 3)
    sigma = b @ b.T  # PSD by construction
    g = gamma_from_trivariate(_lrc_from_sigma(sigma + 1e-12 * np.eye(3)), a_r)
    assert g.min_eigenvalue() >= -1e-8 * max(1.0, abs(g.g11), abs(g.g22))


# --- replication MC ------------------------------------------------------------------


def test_mc_iid_matches_closed_form_within_3se():
    lrc = trivariate_long_run_cov_mc(
        IidSpec(NORMAL), 0.5, 2, q_true=0.0, f_at_q=NORMAL.pdf(0.0), max_lag=5, n_per_rep=2000, n_reps=300, seed=12
    )
    exact = trivariate_iid_closed_form(NORMAL, 0.5, 2)
    diff = np.abs(lrc.sigma - exact.sigma)
    assert (diff <= 3.0 * lrc.mc_se + 1e-9).all(), (lrc.sigma, exact.sigma, lrc.mc_se)


def test_mc_lag0_only_matches_closed_form():
    lrc = trivariate_long_run_cov_mc(
        IidSpec(NORMAL), 0.5, 2, q_true=0.0, f_at_q=NORMAL.pdf(0.0), max_lag=0, n_per_rep=2000, n_reps=200, seed=3
    )
    exact = trivariate_iid_closed_form(NORMAL, 0.5, 2)
    assert (np.abs(lrc.sigma - exact.sigma) <= 3.0 * lrc.mc_se + 1e-9).all()


def test_mc_garch_squares_have_positive_long_run_extra():
    # positive autocorrelation of squares: Var(V) exceeds the lag-0 term
    spec = AugGarchSpec(model="garch", omega=0.1, alpha=(0.1,), beta=(0.8,))
    kw = dict(q_true=0.0, f_at_q=0.4, n_per_rep=4000, n_reps=150, seed=5)
    long_run = trivariate_long_run_cov_mc(spec, 0.5, 2, max_lag=50, **kw)
    lag0 = trivariate_long_run_cov_mc(spec, 0.5, 2, max_lag=0, **kw)
    assert long_run.sigma[1, 1] > lag0.sigma[1, 1] + 3.0 * lag0.mc_se[1, 1]


def test_mc_refuses_inadmissible_spec():
    bad = ArmaSpec(phi=(-1.0,))
    with pytest.raises(RefusalError) as err:
        trivariate_long_run_cov_mc(bad, 0.5, 1, q_true=0.0, f_at_q=0.4, n_per_rep=100, n_reps=10, seed=1)
    assert any(rep.condition_name == "causality" for rep in err.value.reports)


def test_mc_ar1_long_run_variance_of_u():
    # Var(U) = Var(X0) (1 + 2 sum 0.5^i) = 3 Var(X0) = 4 for the AR(1) example
    from fclt_lab.truth import closed_form_truth

    spec = ArmaSpec(phi=(-0.5,))
    truth = closed_form_truth(spec, 0.95, 1)
    lrc = trivariate_long_run_cov_mc(
        spec, 0.95, 1, q_true=truth.q_true, f_at_q=truth.f_at_q, max_lag=40, n_per_rep=5000, n_reps=200, seed=8
    )
    assert lrc.sigma[0, 0] == pytest.approx(4.0, rel=0.08)


def test_mc_reports_truncation_tail_bound():
    # AR(1): true truncated mass sum_{i>L} 2|cov(i)| = (8/3) 0.5^(L+1) / 0.5
    from fclt_lab.truth import closed_form_truth

    spec = ArmaSpec(phi=(-0.5,))
    truth = closed_form_truth(spec, 0.9, 1)
    lrc = trivariate_long_run_cov_mc(
        spec, 0.9, 1, q_true=truth.q_true, f_at_q=truth.f_at_q, max_lag=10, n_per_rep=3000, n_reps=128, seed=3
    )
    exact = (8.0 / 3.0) * 0.5**11 / 0.5
    assert lrc.tail_bound == pytest.approx(exact, rel=0.7)  # order-of-magnitude estimate
    iid = trivariate_long_run_cov_mc(
        IidSpec(NORMAL), 0.5, 2, q_true=0.0, f_at_q=0.4, max_lag=20, n_per_rep=2000, n_reps=100, seed=5
    )
    assert iid.tail_bound == 0.0  # no dependence beyond the noise floor


def test_mc_reproducible_across_threads():
    spec = AugGarchSpec(model="garch", omega=0.1, alpha=(0.1,), beta=(0.8,))
    kw = dict(q_true=0.0, f_at_q=0.4, max_lag=3, n_per_rep=500, n_reps=64, seed=17, chunk_size=16)
    a = trivariate_long_run_cov_mc(spec, 0.5, 2, threads=1, **kw)
    b = trivariate_long_run_cov_mc(spec, 0.5, 2, threads=4, **kw)
    assert np.array_equal(a.sigma, b.sigma)
    assert np.array_equal(a.mc_se, b.mc_se)


# --- single-path HAC -------------------------------------------------------------------


def test_hac_iid_normal_close_to_closed_form():
    values = simulate(IidSpec(NORMAL), 100_000, seed=23).values
    lrc = trivariate_long_run_cov_hac(values, 0.5, 2, bandwidth=20)
    mapped = gamma_from_trivariate(lrc, 0.0)
    exact = iid_gamma(NORMAL, 0.5, 2)
    assert mapped.g11 == pytest.approx(exact.g11, rel=0.10)
    assert mapped.g22 == pytest.approx(exact.g22, rel=0.10)
    assert abs(mapped.g12 - exact.g12) < 0.10 * math.sqrt(exact.g11 * exact.g22)


def test_hac_bandwidth_zero_is_lag0_covariance():
    values = simulate(IidSpec(NORMAL), 5000, seed=2).values
    lrc = trivariate_long_run_cov_hac(values, 0.5, 2, bandwidth=0)
    assert lrc.sigma[0, 0] == pytest.approx(np.var(values, ddof=1), rel=1e-12)
    assert lrc.truncation_lag == 0


def test_hac_is_psd():
    values = simulate(AugGarchSpec(model="garch", omega=0.1, alpha=(0.1,), beta=(0.8,)), 20_000, seed=9).values
    lrc = trivariate_long_run_cov_hac(values, 0.9, 2)
    assert lrc.min_eigenvalue() >= -1e-8 * np.abs(np.diag(lrc.sigma)).max()


def test_hac_near_singular_flagged():
    rng = stream_generator(77)
    values = 5.0 + 1e-9 * rng.standard_normal(2000)
    lrc = trivariate_long_run_cov_hac(values, 0.5, 2, bandwidth=5)
    assert lrc.note is not None and "singular" in lrc.note


def test_hac_requires_enough_data():
    values = np.arange(50, dtype=float)
    with pytest.raises(Exception):
        trivariate_long_run_cov_hac(values, 0.5, 2, bandwidth=20)


# --- remainder terms ---------------------------------------------------------------------


def test_bahadur_exact_cancellation():
    # q_hat = q_true and F_n(q_true) = p: remainder is exactly 0
    values = np.array([1.0, 2.0, 3.0, 4.0])
    assert bahadur_remainder(values, 0.5, 2.0, 0.4) == 0.0


def test_bahadur_single_point_formula():
    values = np.array([1.5])
    p, q, f = 0.4, 1.0, 0.25
    expected = 1.5 - q - (p - 0.0) / f  # F_1(1.0) = 0 since 1.5 > 1.0
    assert bahadur_remainder(values, p, q, f) == pytest.approx(expected)


def test_bahadur_remainder_shrinks_with_n():
    # the corrected-orientation remainder decays; the naive sum with the
    # opposite sign stays O(1), which is how the orientation is pinned down
    from fclt_lab.estimators import empirical_cdf, sample_quantile

    meds, meds_wrong = [], []
    for n in (500, 8000):
        vals_r, vals_w = [], []
        for rep in range(200):
            x = stream_generator(800, rep).standard_normal(n)
            q_hat = sample_quantile(x, 0.5)
            lin = (0.5 - empirical_cdf(x, 0.0)) / NORMAL.pdf(0.0)
            vals_r.append(abs(math.sqrt(n) * (q_hat - lin)))
            vals_w.append(abs(math.sqrt(n) * (q_hat + lin)))
        meds.append(np.median(vals_r))
        meds_wrong.append(np.median(vals_w))
    assert meds[1] < 0.75 * meds[0]  # decays like n^(-1/4)
    assert meds_wrong[1] > 0.75 * meds_wrong[0]  # opposite orientation does not decay


def test_representation_gap_zero_for_symmetric_sample():
    # mean equals mu exactly and r is even: both moment sums coincide
    values = np.array([-2.0, -1.0, 1.0, 2.0])
    assert representation_gap(values, 2, 0.0, 0.0) == 0.0


def test_representation_gap_r2_algebraic_identity():
    # for r = 2 the gap is exactly -sqrt(n) (mean - mu)^2
    rng = stream_generator(5)
    for _ in range(20):
        values = rng.standard_normal(64) * 1.7 + 0.3
        mu = 0.1
        gap = representation_gap(values, 2, mu, 0.0)
        mean = values.mean()
        direct = -math.sqrt(64) * (np.longdouble(mean) - mu) ** 2
        assert gap == pytest.approx(float(direct), rel=1e-9, abs=1e-12)


def test_remainders_translation_consistent():
    rng = stream_generator(6)
    values = rng.standard_normal(128)
    c = 3.7
    r1 = bahadur_remainder(values, 0.3, -0.5, 0.35)
    r2 = bahadur_remainder(values + c, 0.3, -0.5 + c, 0.35)
    assert r2 == pytest.approx(r1, abs=1e-12)
    g1 = representation_gap(values, 2, 0.0, 0.0)
    g2 = representation_gap(values + c, 2, c, 0.0)
    assert g2 == pytest.approx(g1, rel=1e-6, abs=1e-9)
