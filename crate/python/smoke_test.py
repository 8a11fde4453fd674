"""Smoke test for the gridshift Python module.

Build and install the module first, e.g.

    pip install maturin
    maturin develop -m crates/python/Cargo.toml --release

then run `python python/smoke_test.py`.
"""

import json
import math
import os
import tempfile

import gridshift


def check(cond, msg):
    if not cond:
        raise SystemExit(f"FAIL: {msg}")
    print(f"ok   {msg}")


def main():
    load, prices = gridshift.synthetic_day(7)
    check(len(load) == 24 and len(prices) == 24, "synthetic day has 24 hours")

    problem = gridshift.Problem(load, prices, w1=0.9, w2=0.1, peak_cap_fraction=0.85)
    base = problem.evaluate(load)
    check(base["load_shift"] == 0.0, "predicted schedule has zero shift")
    check(all(u <= 0.85 * max(load) + 1e-9 for u in problem.upper_bounds), "peak cap bounds the box")

    pso = gridshift.optimize_pso(problem, seed=3, iterations=60)
    de = gridshift.optimize_de(problem, seed=3, iterations=60)
    for r in (pso, de):
        check(r.objective <= base["objective"], f"{r.algorithm} improves on the predicted schedule")
        check(r.peak_after <= 0.85 * r.peak_before + 1e-9, f"{r.algorithm} respects the peak cap")
        check(all(b <= a for a, b in zip(r.trace, r.trace[1:])), f"{r.algorithm} trace is non-increasing")
    again = gridshift.optimize_pso(problem, seed=3, iterations=60)
    check(again.to_json() == pso.to_json(), "same seed gives identical JSON")
    check(json.loads(pso.to_json())["algorithm"] == "pso", "result JSON parses")

    schedule, objective, points = gridshift.grid_search(problem, [18, 19], resolution=51)
    check(points == 51 * 51, "grid search covers every point")
    check(math.isclose(problem.evaluate(schedule)["objective"], objective), "oracle objective re-evaluates")

    check(abs(gridshift.cost_reduction(24497.938, 23250.378) - 5.09) <= 0.01, "cost reduction arithmetic")
    try:
        gridshift.cost_reduction(0.0, 1.0)
        check(False, "zero baseline raises")
    except gridshift.GridshiftError:
        check(True, "zero baseline raises")
    try:
        gridshift.Problem(load[:23], prices)
        check(False, "23-hour profile raises")
    except gridshift.GridshiftError:
        check(True, "23-hour profile raises")

    with tempfile.TemporaryDirectory() as tmp:
        data = os.path.join(tmp, "data.csv")
        gridshift.write_synthetic_dataset(data, days=8, seed=1)
        model, report = gridshift.Model.train(data, epochs=5, seed=1)
        check(json.loads(report)["train_windows"] > 0, "training reports windows")
        path = os.path.join(tmp, "model.txt")
        model.save(path)
        loaded = gridshift.Model.load(path)
        check(loaded.layer_sizes == [29, 25, 20, 15, 1], "model round-trips through a file")
        forecast = loaded.predict_day(data, "2010-01-08")
        check(forecast == model.predict_day(data, "2010-01-08"), "loaded model predicts identically")
        check(len(forecast) == 24 and all(v >= 0 for v in forecast), "forecast is 24 non-negative loads")

    print("smoke test passed")


if __name__ == "__main__":
    main()
