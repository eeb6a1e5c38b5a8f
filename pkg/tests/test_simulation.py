import json
import math

import numpy as np
import pytest

from setvote import ExperimentConfig, private_hoeffding_interval, randomized_response, run_experiment
from setvote.simulation import (
    SCENARIOS,
    run_hulc_mom,
    run_independent_sets,
    run_multisplit_conformal,
    run_private_agents,
    run_worstcase_dependence,
)

SMALL = {
    "private-agents": 20,
    "worst-case": 500,
    "independent-sets": 200,
    "multisplit-conformal": 10,
    "momom": 5,
    "hulc-mom": 10,
    "lambda-sampling": 50,
    "ruger-validity": 200,
    "risk-control": 50,
}


class TestPrivacy:
    def test_hoeffding_width(self):
        iv = private_hoeffding_interval(np.zeros(100), 2.0, 0.1)
        assert iv.width == pytest.approx(0.3214, abs=5e-4)
        iv4 = private_hoeffding_interval(np.zeros(400), 2.0, 0.1)
        assert iv4.width == pytest.approx(iv.width / 2)
        assert private_hoeffding_interval(np.zeros(10), 2.0, 0.999).width > 0

    def test_randomized_response_mean(self):
        z = randomized_response(np.full(200_000, 0.5), 1.0, seed=0)
        assert set(np.unique(z)) <= {0.0, 1.0}
        assert z.mean() == pytest.approx(0.5, abs=0.005)

    def test_unbiased_after_debiasing(self):
        x = np.full(200_000, 0.8)
        iv = private_hoeffding_interval(randomized_response(x, 1.0, seed=1), 1.0, 0.05)
        assert iv.contains(0.8)
        assert abs((iv.lower + iv.upper) / 2 - 0.8) < 0.01

    def test_no_privacy_limit(self):
        z = randomized_response(np.full(50_000, 0.3), 40.0, seed=2)
        assert z.mean() == pytest.approx(0.3, abs=0.01)

    @pytest.mark.parametrize("eps", [0, -1])
    def test_bad_eps(self, eps):
        with pytest.raises(ValueError):
            randomized_response([0.5], eps)
        with pytest.raises(ValueError):
            private_hoeffding_interval([0.5], eps, 0.1)

    def test_bad_raw(self):
        with pytest.raises(ValueError):
            randomized_response([1.5], 1.0)


class TestConfig:
    def test_defaults_and_coercion(self):
        c = ExperimentConfig("private-agents", params={"K": "4", "eps": "1.5"})
        assert c.replications == 2000 and c.params["K"] == 4 and c.params["eps"] == 1.5
        assert c.to_json()["params"]["n"] == 100 and "n_jobs" not in c.to_json()

    @pytest.mark.parametrize(
        "kw",
        [
            dict(scenario="nope"),
            dict(scenario="momom", replications=0),
            dict(scenario="momom", params={"bogus": 1}),
            dict(scenario="worst-case", params={"K": 4}),
            dict(scenario="worst-case", params={"alpha": 0.9}),
            dict(scenario="private-agents", params={"eps": 0}),
            dict(scenario="momom", n_jobs=0),
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ExperimentConfig(**kw)


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_every_scenario_runs_and_serializes(name, tmp_path):
    rep = run_experiment(ExperimentConfig(name, SMALL[name], master_seed=3))
    obj = json.loads(rep.json_text())
    assert obj["schema"] == "setvote/1" and obj["config"]["scenario"] == name
    assert rep.csv_text().count("\n") == len(rep.table) + 1
    rep.write(tmp_path / "a.csv", tmp_path / "a.json")
    assert (tmp_path / "a.csv").read_text() == rep.csv_text()


@pytest.mark.parametrize("name", ["private-agents", "multisplit-conformal", "risk-control"])
def test_parallel_matches_serial(name):
    a = run_experiment(ExperimentConfig(name, SMALL[name], master_seed=9, n_jobs=1))
    b = run_experiment(ExperimentConfig(name, SMALL[name], master_seed=9, n_jobs=2))
    assert a.json_text() == b.json_text() and a.csv_text() == b.csv_text()


def test_seed_changes_output():
    a = run_private_agents(replications=10, master_seed=1)
    b = run_private_agents(replications=10, master_seed=2)
    assert a.json_text() != b.json_text()


def test_single_agent_degenerates():
    rep = run_private_agents(replications=50, master_seed=0, K=1)
    assert rep["majority"].width == pytest.approx(rep["agent"].width)
    assert rep["majority"].coverage == rep["agent"].coverage
    rep = run_multisplit_conformal(replications=5, master_seed=0, K=1)
    assert rep["exchangeable"].width == pytest.approx(rep["agent"].width)
    rep = run_hulc_mom(replications=5, master_seed=0, K=1)
    assert rep["majority"].width == pytest.approx(rep["exchangeable"].width)


def test_worst_case_small_k():
    rep = run_worstcase_dependence(replications=20_000, master_seed=0, K=3)
    assert rep.extras["majority_miscoverage"] == pytest.approx(0.15, abs=0.01)
    rep = run_worstcase_dependence(replications=100, master_seed=0, alpha=0.0)
    assert rep.extras["majority_miscoverage"] == 0 and rep.extras["agent_miscoverage"] == 0


def test_independent_extras():
    rep = run_independent_sets(replications=300, master_seed=0)
    assert rep.extras["binomial_quantile"] == 7
    assert 0.9 < rep.extras["independent_coverage_exact"] < 0.95
    assert rep.bound_checks and all(set(c) >= {"rule", "bound", "ok"} for c in rep.bound_checks)


def test_even_bucket_note():
    with pytest.warns(UserWarning):
        rep = run_hulc_mom(replications=3, master_seed=0, B1=6)
    assert rep.notes


def test_runner_rejects_other_config():
    with pytest.raises(ValueError):
        run_private_agents(ExperimentConfig("momom", 2))


def test_nan_serializes_as_null():
    rep = run_private_agents(replications=1, master_seed=0)
    obj = rep.to_json()
    assert all(v is None or math.isfinite(v) for v in obj["rules"]["agent"]["se"].values())
