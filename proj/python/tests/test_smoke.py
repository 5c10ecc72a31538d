"""Smoke tests for the python bindings (run via ctest)."""

import math
import sys

import xcflow


def approx(a, b, tol=1e-9):
    return abs(a - b) <= tol * (1.0 + abs(b))


def test_version():
    assert isinstance(xcflow.__version__, str) and xcflow.__version__


def test_curvature_nil():
    c = xcflow.curvature("nil")
    assert approx(c["detP"], 3.0 / 64.0, 1e-13)
    assert approx(c["sec"][0], -0.25, 1e-12)
    assert approx(c["sec"][2], 0.75, 1e-12)


def test_flow_hyperbolic_scaling():
    trace = xcflow.run_flow(
        "hyperbolic_solvable(1,1)", t_end=0.5, dt=1e-3, adaptive=False
    )
    assert trace["breakdown"] is None
    g = trace["final_metric"]
    scale = math.sqrt(3.0)  # sqrt(1 + 4 * 0.5)
    for i in range(3):
        assert approx(g[i][i], scale, 1e-7)


def test_sphere_breakdown():
    trace = xcflow.run_flow("su2_round", branch="positive", t_end=0.5)
    assert trace["breakdown"] is not None
    assert trace["breakdown"]["reason"] == "H_exceeded"
    assert abs(trace["breakdown"]["time"] - 0.25) < 1e-3


def test_sweep_pinching():
    results = xcflow.sweep(
        "hyperbolic_solvable(1,1)", "alphabeta", [0.5, 1.5], t_end=0.1
    )
    assert len(results) == 2
    for r in results:
        assert r["error"] == ""
        assert all(abs(p - 1.0) < 1e-9 for p in r["pinching"])


def test_verify_subset():
    rep = xcflow.verify(only=["eta_half", "norm_decomposition"], ensemble=300)
    assert rep["all_pass"]
    assert {c["id"] for c in rep["checks"]} == {"eta_half", "norm_decomposition"}


def test_grid_flow():
    trace = xcflow.run_flow_grid(n=12, t_end=0.004, dt=1e-3, adaptive=False)
    assert trace["breakdown"] is None
    assert trace["samples"][-1]["t"] > 0.0
    assert trace["samples"][-1]["volume"] > 0.0


def test_errors():
    try:
        xcflow.run_flow("not_a_preset")
    except xcflow.InvalidParameter:
        pass
    else:
        raise AssertionError("expected InvalidParameter")


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    failures = 0
    for t in tests:
        try:
            t()
            print(f"{t.__name__}: ok")
        except Exception as exc:  # noqa: BLE001
            failures += 1
            print(f"{t.__name__}: FAILED ({exc})")
    if failures:
        sys.exit(1)


if __name__ == "__main__":
    main()
