#!/usr/bin/env python3
"""Smoke test for the pilotwave_py extension module.

Build the module first, then run this script:

    cargo build --release -p pilotwave-py
    python3 python/smoke_test.py
"""

import math
import os
import shutil
import sys
import tempfile


def import_module():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    candidates = [
        os.path.join(root, "target", profile, name)
        for profile in ("release", "debug")
        for name in ("libpilotwave_py.so", "libpilotwave_py.dylib", "pilotwave_py.dll")
    ]
    built = next((c for c in candidates if os.path.exists(c)), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p pilotwave-py")
    stage = tempfile.mkdtemp(prefix="pilotwave-py-")
    ext = ".so" if not built.endswith(".dll") else ".pyd"
    shutil.copy(built, os.path.join(stage, "pilotwave_py" + ext))
    sys.path.insert(0, stage)
    import pilotwave_py

    return pilotwave_py


def main():
    pw = import_module()
    failures = []

    def check(name, ok, detail=""):
        print(f"  [{'ok' if ok else 'FAIL'}] {name} {detail}")
        if not ok:
            failures.append(name)

    # free Gaussian: moments and dispersion
    grid = pw.Grid(-20.0, 20.0, 512)
    psi = pw.WaveFunction.gaussian(grid, 0.0, 1.0, 2.0)
    check("gaussian norm", abs(psi.norm() - 1.0) < 1e-9)
    check("gaussian <p> = k", abs(psi.momentum_mean() - 2.0) < 1e-9)
    evolved = psi.propagate_free(1e-3, 2000)
    sigma = math.sqrt(evolved.position_variance())
    check(
        "free dispersion sigma(2) = sqrt(2)",
        abs(sigma - math.sqrt(2.0)) < 1e-5,
        f"sigma = {sigma:.6f}",
    )
    check("ehrenfest drift", abs(evolved.mean_position() - 4.0) < 0.05)

    # plane-wave-like velocity
    v = psi.velocity(0.3)
    check("guidance velocity = k", abs(v - 2.0) < 1e-3, f"v = {v:.6f}")

    # superposition interference
    g1 = pw.WaveFunction.gaussian(grid, -2.0, 0.7, 0.0)
    g2 = pw.WaveFunction.gaussian(grid, 2.0, 0.7, 0.0)
    slit = g1.superpose(g2, 1 + 0j, 1 + 0j)
    check("superposition normalized", abs(slit.norm() - 1.0) < 1e-9)

    # Born sampling + KS self-consistency
    a = slit.born_sample(4000, 7)
    b = slit.born_sample(4000, 8)
    rep = pw.ks_test(a, b)
    check("born samples KS-consistent", rep["p_value"] >= 0.01, f"p = {rep['p_value']:.3f}")
    check("born sampling deterministic", slit.born_sample(64, 3) == slit.born_sample(64, 3))

    # a non-crossing trajectory through the double slit
    times, xs = pw.double_slit_trajectory(4.0, 0.7, 1.2, 2.0, 1e-2)
    check("trajectory stays right of the axis", min(xs) > 0.0, f"min x = {min(xs):.3f}")
    check("trajectory spans the full window", abs(times[-1] - 2.0) < 1e-9)

    # weak values: qubit and three-box
    aw = pw.weak_value([0.8, 0.6], [1.0, 1.0], [1, 0, 0, -1])
    check("qubit weak value 1/7", abs(aw - (1.0 / 7.0)) < 1e-12, f"a_w = {aw}")
    boxes = pw.three_box()
    values = [round(r["a_w_re"], 12) for r in boxes]
    check("three-box values (1, 1, -1)", values == [1.0, 1.0, -1.0], str(values))

    # pointer simulation converges to the weak value
    errs = [abs(pw.qubit_pointer_mean(0.8, 0.6, s)[0] - 1.0 / 7.0) for s in (4.0, 16.0, 64.0)]
    check(
        "pointer mean converges to a_w",
        errs[0] > errs[1] > errs[2] and errs[2] < 0.01 / 7.0,
        f"errors = {[f'{e:.2e}' for e in errs]}",
    )

    if failures:
        sys.exit(f"{len(failures)} smoke checks failed: {failures}")
    print(f"all {13} smoke checks passed")


if __name__ == "__main__":
    main()
