"""Smoke test for the pyacdg extension.

Build and install first:  pip install -e crates/python --no-build-isolation
Then run:                 python python/smoke_test.py
"""

import json
import math
from pathlib import Path

import pyacdg

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL = {
    "dimension": 1,
    "mesh": {"n": 16},
    "time": {"T": 0.5, "N_slabs": 4, "k": 1},
    "space": {"degree_l": 1},
    "epsilon": 0.5,
    "problem": {"manufactured": "expsine"},
}


def check(cond, msg):
    if not cond:
        raise SystemExit(f"FAIL: {msg}")
    print(f"ok: {msg}")


def main():
    check("expsine" in pyacdg.problems(), "registry lists expsine")

    cfg = pyacdg.RunConfig.from_json(json.dumps(SMALL))
    check(len(cfg.hash()) == 16, "config hash has 16 hex digits")
    check(pyacdg.RunConfig.from_json(cfg.to_json()).hash() == cfg.hash(), "config survives a JSON roundtrip")

    sol, norms = pyacdg.solve(cfg)
    check(sol.n_slabs == 4 and sol.free_dofs == 15, "solution shape")
    check(0.0 < norms["L2L2"] < 1e-2, f"L2L2 error is small ({norms['L2L2']:.3e})")
    mid = sol.value_at(0.5)
    xs = [x for x, _ in sol.dof_coordinates()]
    exact = [math.exp(-0.5) * math.sin(math.pi * x) for x in xs]
    check(max(abs(a - b) for a, b in zip(mid, exact)) < 1e-2, "u_h(T) is close to the exact solution")

    report = pyacdg.verify(pyacdg.RunConfig.from_path(str(CONFIGS / "verify_default.json")))
    status = {c["name"]: c["status"] for c in report["checks"]}
    check(status["duality"] == "pass" and status["energy"] == "pass", "duality and energy identities pass")

    table = pyacdg.convergence(cfg, levels=3, refine="both")
    check(len(table["rows"]) == 3, "three-level ladder")
    check(abs(table["rows"][-1]["order_l2h1"] - 1.0) < 0.2, "L2H1 order near 1")

    rho = pyacdg.characteristic(2, 0.3)
    check(abs(rho[0] - 1.0) < 1e-14, "rho(0) = 1")

    bad = dict(SMALL, epsilom=0.5)
    try:
        pyacdg.RunConfig.from_json(json.dumps(bad))
    except ValueError as e:
        check(json.loads(str(e))["exit_code"] == 4, "unknown field rejected as a config error")
    else:
        raise SystemExit("FAIL: unknown field accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
