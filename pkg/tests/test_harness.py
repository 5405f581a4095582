import json
import math

import numpy as np
import pytest

from fclt_lab.arma import ArmaSpec
from fclt_lab.asymptotics import iid_gamma
from fclt_lab.errors import ParameterError, RefusalError
from fclt_lab.garch import AugGarchSpec
from fclt_lab.harness import (
    ExperimentConfig,
    run_bahadur_experiment,
    run_clt_experiment,
    run_fclt_experiment,
    run_representation_experiment,
)
from fclt_lab.innovations import InnovationDist
from fclt_lab.processes import IidSpec
from fclt_lab.truth import Truth, closed_form_truth, truth_from_sample

NORMAL = InnovationDist()
IID = IidSpec(NORMAL)


def iid_cfg(**kw):
    base = dict(
        spec=IID,
        p=0.5,
        r=2,
        n=1500,
        reps=300,
        seed=5,
        truth=closed_form_truth(IID, kw.get("p", 0.5), kw.get("r", 2)),
        target=iid_gamma(NORMAL, kw.get("p", 0.5), kw.get("r", 2)),
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_clt_iid_passes_all_entries():
    rep = run_clt_experiment(iid_cfg())
    assert rep.used == 300 and rep.quarantined == 0
    assert all(v == "pass" for row in rep.verdict for v in row), (rep.empirical_cov, rep.per_entry_z)
    assert abs(rep.empirical_mean[0]) < 0.5  # sqrt(n)-scaled centered, should be near 0


def test_quarantine_accounting_and_small_m_inconclusive():
    rep = run_clt_experiment(iid_cfg(reps=2))
    assert rep.used + rep.quarantined == 2
    assert all(v == "inconclusive" for row in rep.verdict for v in row)


def test_refusal_on_non_causal_spec():
    truth = closed_form_truth(IID, 0.5, 2)
    cfg = ExperimentConfig(spec=ArmaSpec(phi=(-1.5,)), p=0.5, r=2, n=100, reps=10, seed=1, truth=truth)
    with pytest.raises(RefusalError) as err:
        run_clt_experiment(cfg)
    assert any(r.condition_name == "causality" for r in err.value.reports)


def test_refusal_when_density_unverifiable():
    # degenerate (constant) sample: the density entry of the truth is absent
    degenerate = truth_from_sample(np.full(50, 1.0), 0.5, 2)
    cfg = ExperimentConfig(spec=IID, p=0.5, r=2, n=100, reps=10, seed=1, truth=degenerate)
    with pytest.raises(RefusalError, match="density"):
        run_clt_experiment(cfg)


def test_refusal_without_truth():
    cfg = ExperimentConfig(spec=IID, p=0.5, r=2, n=100, reps=10, seed=1)
    with pytest.raises(RefusalError):
        run_clt_experiment(cfg)


def test_reports_identical_across_thread_counts():
    cfg = iid_cfg(reps=128, n=500, chunk_size=32)
    a = run_clt_experiment(cfg, threads=1)
    b = run_clt_experiment(cfg, threads=4)
    assert json.dumps(a.to_obj(), sort_keys=True) == json.dumps(b.to_obj(), sort_keys=True)


def test_fclt_t1_reproduces_clt_exactly():
    cfg = iid_cfg(reps=200, n=1000, t_grid=(0.5, 1.0))
    frep = run_fclt_experiment(cfg)
    crep = run_clt_experiment(iid_cfg(reps=200, n=1000))
    assert np.array_equal(frep.clt.empirical_cov, crep.empirical_cov)
    assert np.array_equal(frep.clt.empirical_mean, crep.empirical_mean)
    assert np.array_equal(frep.cov_by_t[-1], crep.empirical_cov)


def test_fclt_brownian_scaling_iid():
    cfg = iid_cfg(reps=600, n=2000, t_grid=(0.25, 0.5, 0.75, 1.0))
    rep = run_fclt_experiment(cfg)
    assert rep.t_grid == (0.25, 0.5, 0.75, 1.0)
    # linear-in-t growth within 3 SEs, all entries and grid points
    assert (rep.scaling_z <= 3.0 + 1e-9).all(), rep.scaling_z
    # disjoint increments decorrelated within 3 SEs
    assert (np.abs(rep.increment_corr_z) <= 3.0).all(), rep.increment_corr_z


def test_fclt_requires_grid():
    with pytest.raises(ParameterError):
        run_fclt_experiment(iid_cfg())


def test_bahadur_ladder_iid_decreasing():
    cfg = iid_cfg(reps=300, n_ladder=(300, 1200, 4800))
    table = run_bahadur_experiment(cfg)
    assert table.verdict == "pass", table.rows()
    meds = table.median
    assert meds[-1] < meds[0]


def test_single_rung_ladder_inconclusive():
    table = run_bahadur_experiment(iid_cfg(reps=50, n_ladder=(400,)))
    assert table.verdict == "inconclusive"
    assert len(table.rows()) == 1


def test_representation_ladder_iid_r1():
    # needs continuity at mu, satisfied by the normal; std of the gap shrinks
    cfg = iid_cfg(p=0.5, r=1, reps=300, n_ladder=(300, 1200, 4800))
    table = run_representation_experiment(cfg)
    assert table.verdict == "pass", table.rows()


def test_representation_refuses_without_mu_and_a_r():
    partial = Truth(q_true=0.0, f_at_q=0.4, mu=None, m_true=1.0, a_r=None, p=0.5, r=2)
    cfg = ExperimentConfig(spec=IID, p=0.5, r=2, n=100, reps=20, seed=3, truth=partial, n_ladder=(100, 200))
    with pytest.raises(RefusalError, match="mu"):
        run_representation_experiment(cfg)


def test_reports_serialize_to_json():
    rep = run_clt_experiment(iid_cfg(reps=64, n=400))
    text = json.dumps(rep.to_obj(), sort_keys=True)
    assert "empirical_cov" in text
    table = run_bahadur_experiment(iid_cfg(reps=64, n_ladder=(200, 400)))
    assert "rows" in json.dumps(table.to_obj())


def test_config_validation():
    truth = closed_form_truth(IID, 0.5, 2)
    with pytest.raises(ParameterError):
        ExperimentConfig(spec=IID, p=0.5, r=2, n=100, reps=1, seed=1, truth=truth)
    with pytest.raises(ParameterError):
        ExperimentConfig(spec=IID, p=1.5, r=2, n=100, reps=10, seed=1, truth=truth)
    with pytest.raises(ParameterError):
        ExperimentConfig(spec=IID, p=0.5, r=0, n=100, reps=10, seed=1, truth=truth)
