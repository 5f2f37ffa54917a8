import numpy as np
import pytest

import anchorda


def random_problem(seed, n=60, p=8, q=2):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, p)), rng.normal(size=n), rng.normal(size=(n, q))


def test_gamma_one_matches_ridge():
    x, y, a = random_problem(0)
    anchor = anchorda.fit_anchor(x, y, a, gamma=1.0, lambda_=0.5)
    ridge = anchorda.fit_ridge(x, y, lambda_=0.5)
    np.testing.assert_allclose(anchor.beta, ridge.beta, rtol=1e-10, atol=0)


def test_ridge_matches_numpy():
    x, y, _ = random_problem(1)
    beta = anchorda.fit_ridge(x, y, lambda_=2.0).beta
    expected = np.linalg.solve(x.T @ x + 2.0 * np.eye(x.shape[1]), x.T @ y)
    np.testing.assert_allclose(beta, expected, rtol=1e-10)


def test_anchor_fit_matches_explicit_transform():
    x, y, a = random_problem(2)
    m = np.column_stack([np.ones(len(y)), a])
    proj = m @ np.linalg.pinv(m)
    w = np.eye(len(y)) + (4.0 - 1.0) * proj
    expected = np.linalg.solve(x.T @ w @ x + 0.3 * np.eye(x.shape[1]), x.T @ w @ y)
    model = anchorda.fit_anchor(x, y, a, gamma=4.0, lambda_=0.3)
    np.testing.assert_allclose(model.beta, expected, rtol=1e-9)
    np.testing.assert_allclose(anchorda.project(a, y[:, None])[:, 0], proj @ y, atol=1e-12)


def test_solver_paths_agree():
    x, y, a = random_problem(3, n=20, p=50)
    primal = anchorda.fit_anchor(x, y, a, 2.0, 0.1, solver="primal")
    dual = anchorda.fit_anchor(x, y, a, 2.0, 0.1, solver="dual")
    assert dual.solver == "dual"
    np.testing.assert_allclose(primal.beta, dual.beta, rtol=1e-8)


def test_model_json_round_trip_and_predict():
    x, y, a = random_problem(4)
    model = anchorda.fit_anchor(x, y, a, 3.0, 1.0)
    back = anchorda.LinearModel.from_json(model.to_json())
    assert back == model
    np.testing.assert_array_equal(back.predict(x), anchorda.predict(model, x))


def test_metrics_and_splits():
    assert anchorda.metrics(np.array([0.0, 2.0]), np.array([1.0, 1.0])) == (1.0, 0.0)
    rmse, r2 = anchorda.metrics(np.array([3.0, 3.0]), np.array([1.0, 1.0]))
    assert rmse == 2.0 and np.isnan(r2)
    ids = [f"m{i}" for i in range(21)]
    folds = anchorda.grouped_kfold(ids, 3, 1)
    assert sorted(np.bincount(list(folds.values()))) == [7, 7, 7]
    train, test = anchorda.split_models(ids, 0.75, 1)
    assert (len(train), len(test)) == (16, 5)
    assert not set(train) & set(test)


def test_detection_boundary():
    out = anchorda.detect([2000, 2001], np.array([0.10, 0.11]), sigma=[0.05, 0.05])
    assert out["detected"] == [False, True]
    assert out["first_detection_year"] == 2001


def test_simulate_and_risk():
    sim = anchorda.simulate(1, {"n_models": 2, "grid_shape": "4,2"}, anomalies=True)
    assert sim["x"].shape == (2 * 2 * 231, 8)
    assert sim["anchor_names"] == ["volcanic"]
    again = anchorda.simulate(1, {"n_models": 2, "grid_shape": "4,2"}, anomalies=True)
    np.testing.assert_array_equal(sim["x"], again["x"])
    model = anchorda.fit_anchor(sim["x"], sim["y"], sim["anchors"], 4.0, 1.0)
    mse, sup, arg = anchorda.worst_case_risk(model, [0.0, 5.0], 1, {"n_models": 2, "grid_shape": "4,2"})
    assert len(mse) == 2 and sup == max(mse)


def test_errors_carry_their_kind():
    x, y, a = random_problem(5)
    with pytest.raises(anchorda.AnchordaError, match="domain"):
        anchorda.fit_anchor(x, y, a, gamma=-1.0, lambda_=1.0)
    with pytest.raises(anchorda.AnchordaError, match="config"):
        anchorda.simulate(1, {"grid_shape": "0,8"})


def test_cli_in_process(tmp_path):
    code, _, err = anchorda.run_cli(["simulate", "--out", str(tmp_path)])
    assert code == 1 and "--seed" in err
    code, _, _ = anchorda.run_cli(["simulate", "--seed", "1", "--n_models", "1", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "data.csv").exists()
