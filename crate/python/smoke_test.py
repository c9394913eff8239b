#!/usr/bin/env python3
"""Smoke test for the shortfall_py extension module.

Build the extension first, then run this script:

    cargo build -p shortfall-py --release
    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def import_extension():
    """Copy the built cdylib next to a temp dir under the importable name."""
    candidates = [
        REPO / "target" / profile / f"{prefix}shortfall_py{suffix}"
        for profile in ("release", "debug")
        for prefix, suffix in (("lib", ".so"), ("lib", ".dylib"), ("", ".dll"))
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("shortfall_py is not built; run: cargo build -p shortfall-py --release")
    stage = Path(tempfile.mkdtemp(prefix="shortfall_py_"))
    shutil.copy2(built, stage / "shortfall_py.so")
    sys.path.insert(0, str(stage))
    import shortfall_py

    return shortfall_py


def main():
    sf = import_extension()
    print(f"shortfall_py {sf.__version__} loaded")

    # Known-consumption solve: sqrt/linear pair, budget 4.
    inst = sf.KnownInstance(
        [sf.CostFunction.sqrt(1.0), sf.CostFunction.linear(1.0)],
        [4.0, 2.0],
        4.0,
    )
    assert inst.validate() == []
    report = inst.solve()
    assert report.allocation == [2.0, 2.0], report.allocation
    assert abs(report.true_objective - math.sqrt(2.0) / 2.0) < 1e-12
    oracle = inst.oracle()
    assert abs(oracle["objective"] - report.true_objective) < 1e-12
    print(f"solve-known: allocation {report.allocation}, objective {report.true_objective:.12f}")

    # Expected cost: Uniform[1,2] with unit linear cost.
    k = sf.ExpectedCost(sf.CostFunction.linear(1.0), sf.Prior.uniform(1.0, 2.0))
    assert abs(k.eval(0.0) - 1.5) < 1e-12
    assert abs(k.eval(1.5) - 0.125) < 1e-12
    assert abs(k.eval(1.5) - k.eval_quadrature(1.5)) < 1e-8
    curvature = k.check_curvature(51)
    assert curvature["all_ok"], curvature
    print(f"expected cost: K(0)={k.eval(0.0)}, K(1.5)={k.eval(1.5)}, curvature ok")

    # Symmetric unknown-consumption solve.
    unknown = sf.UnknownInstance(
        [sf.CostFunction.linear(1.0)] * 2,
        [sf.Prior.uniform(1.0, 2.0)] * 2,
        2.0,
    )
    sym = unknown.sym_alloc()
    assert abs(sym.normalized_objective - 0.5) < 1e-9
    assert sym.allocation == [1.0, 1.0], sym.allocation
    grid = unknown.grid_oracle(0.01)
    assert abs(grid["objective"] - sym.normalized_objective) < 0.01 * grid["grid_lipschitz"] + 1e-6
    print(f"sym-alloc: allocation {sym.allocation}, objective {sym.normalized_objective}")

    # Simulation: deterministic steady state matches the shortfall law, and
    # identical seeds reproduce results exactly.
    result = sf.simulate(
        [sf.Consumption.deterministic(1.0), sf.Consumption.deterministic(2.0)],
        sf.Availability.constant(2.0),
        [1.0, 0.5],
        [sf.CostFunction.linear(1.0)] * 2,
        10_000,
    )
    assert result["avg_shortfall"] == [0.0, 1.5], result["avg_shortfall"]
    assert result["slot_feasibility_violations"] == 0

    noisy = lambda: sf.simulate(
        [sf.Consumption.scaled_bernoulli(2.0, 0.5, seed=42)],
        sf.Availability.iid_uniform(0.5, 1.5, seed=7),
        [0.5],
        [sf.CostFunction.linear(1.0)],
        50_000,
    )
    first, second = noisy(), noisy()
    assert first["avg_shortfall"] == second["avg_shortfall"]
    print(f"simulate: deterministic shortfall {result['avg_shortfall']}, reproducible")

    trace = sf.stability_trace(sf.Consumption.scaled_bernoulli(2.0, 0.5, seed=3), 0.5, 200_000)
    assert trace["final_ratio"] <= 0.01
    assert trace["zero_queue_slots"] >= 1
    print(f"stability: Q(T)/T = {trace['final_ratio']}, ok")

    print("smoke test passed")


if __name__ == "__main__":
    main()
