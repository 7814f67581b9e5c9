import json

import numpy as np
import pytest

import rieszreg


ATE_FIT = json.dumps(
    {
        "fit": {
            "loss": {"kind": "sq", "c": 1.0},
            "link": {"kind": "canonical", "branch": "treatment_sign"},
            "model": {"kind": "linear", "basis": {"kind": "polynomial", "degree": 1}},
            "penalty": {"order": "l2", "lambda": 1e-4},
        }
    }
)


def ate_draw(seed=3, n=400):
    draw = rieszreg.synthetic("synthetic_ate", seed=seed, n=n)
    return draw["x"], draw["y"], draw["theta0"]


def test_fit_returns_alpha_and_balance():
    x, y, _ = ate_draw()
    out = rieszreg.fit(x, y, config=ATE_FIT)
    assert out["alpha"].shape == (x.shape[0],)
    assert np.all(np.isfinite(out["alpha"]))
    assert out["converged"]
    # canonical SQ pair at tiny lambda: residuals within the stated bound
    assert out["balance_max_violation"] <= 1e-6


def test_estimate_covers_truth_roughly():
    x, y, theta0 = ate_draw(seed=11, n=800)
    config = json.loads(ATE_FIT)
    config["estimate"] = {"methods": ["aipw", "tmle"], "folds": 2}
    rows = rieszreg.estimate(x, y, config=json.dumps(config))
    assert [r["method"] for r in rows] == ["aipw", "tmle"]
    for row in rows:
        assert row["ci_low"] < row["ci_high"]
        assert abs(row["theta"] - theta0) < 2.0


def test_estimate_is_deterministic():
    x, y, _ = ate_draw(seed=5, n=300)
    config = json.loads(ATE_FIT)
    config["estimate"] = {"methods": ["aipw"], "folds": 3}
    first = rieszreg.estimate(x, y, config=json.dumps(config))
    second = rieszreg.estimate(x, y, config=json.dumps(config))
    assert first == second


def test_config_errors_are_value_errors():
    x, y, _ = ate_draw(seed=7, n=100)
    bad = json.dumps({"fit": {"penalty": {"order": "l2", "lambda": -1.0}}})
    with pytest.raises(ValueError):
        rieszreg.fit(x, y, config=bad)


def test_nn_matching_runs():
    x, y, theta0 = ate_draw(seed=13, n=400)
    theta = rieszreg.nn_matching_ate(x, y, m=2)
    assert abs(theta - theta0) < 2.5


def test_benchmark_binding_micro_run():
    config = json.dumps(
        {
            "seed": 4,
            "benchmark": {
                "replications": 3,
                "n": 60,
                "folds": 2,
                "variants": ["true"],
                "methods": ["aipw"],
            },
        }
    )
    out = rieszreg.benchmark(config)
    assert len(out["rows"]) == 1
    row = out["rows"][0]
    assert row["variant"] == "true" and row["method"] == "aipw"
    assert row["replications"] == 3 and row["failures"] == 0
    assert np.isfinite(row["mse"])
