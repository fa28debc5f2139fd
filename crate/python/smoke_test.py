#!/usr/bin/env python3
"""Smoke test for the cohft Python bindings.

Install first (from the repo root):

    pip install -e crates/cohft-py --no-build-isolation

then run `python python/smoke_test.py`. Exits nonzero on the first
failed check.
"""

import sys

import cohft


def check(label, ok):
    print(f"[{'pass' if ok else 'FAIL'}] {label}")
    if not ok:
        sys.exit(1)


def main():
    # theory catalogue
    t = cohft.Theory("gsw")
    check("alias gsw resolves to gsw_so3", t.name == "gsw_so3")
    check("gsw_so3 has the 8 + 4 spinor fields", len(t.fields()) == 12)
    check(
        "suites applicable to dw include descent",
        "descent" in cohft.Theory("dw").suites(),
    )

    # identity suites; small trial counts keep this a smoke test
    for theory in ["dw", "sw_u1", "gsw_so3", "kw"]:
        reports = cohft.verify(theory, "nilpotency", trials=2, seed=7)
        ok = all(
            i["status"] == "pass" for r in reports for i in r["identities"]
        )
        check(f"nilpotency suite passes for {theory}", ok)
    reports = cohft.verify("dw", "descent", trials=2)
    check(
        "descent chain closes for dw",
        all(i["status"] == "pass" for r in reports for i in r["identities"]),
    )

    # determinism: same seed, same report
    a = cohft.verify("sw_u1", "action", trials=2, seed=42)
    b = cohft.verify("sw_u1", "action", trials=2, seed=42)
    check("reports are deterministic for a fixed seed", a == b)

    # toy model: Gauss–Bonnet, Poincaré–Hopf, and the fibration check
    value, est = cohft.euler_characteristic()
    check("Gauss–Bonnet gives χ(S²) = 2", abs(value - 2.0) < 1e-6 and est < 1e-6)
    check("index sum of the double-winding field is 2", cohft.index_sum("double") == 2)
    rows, spread = cohft.t_sweep([0.0, -1.0, -10.0, -100.0])
    check("interpolating integral is t-independent", spread < 1e-6)
    aj = cohft.aj_projection_check()
    check(
        "SO(3) fibration integral matches the base",
        aj["relative_error"] < 0.05 and abs(aj["fiber_normalization"] - 1.0) < 1e-12,
    )

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
