#!/usr/bin/env python3
"""Smoke test for the nlscyl_py extension module.

Builds the cdylib with cargo, loads it, and checks a handful of closed-form
values through the Python surface.
"""
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_and_import():
    subprocess.run(
        ["cargo", "build", "-p", "nlscyl-py"], cwd=ROOT, check=True
    )
    lib = ROOT / "target" / "debug" / "libnlscyl_py.so"
    assert lib.is_file(), f"missing {lib}"
    stage = Path(tempfile.mkdtemp(prefix="nlscyl-py-"))
    shutil.copy(lib, stage / "nlscyl_py.so")
    sys.path.insert(0, str(stage))
    import nlscyl_py

    return nlscyl_py


def approx(a, b, rel=1e-10):
    assert abs(a - b) <= rel * max(1.0, abs(a), abs(b)), f"{a} != {b}"


def main():
    nl = build_and_import()

    grid = nl.Grid(2 * math.pi, 32, 8)
    approx(grid.weight, 1.0)
    approx(grid.dxi, 1.0)

    # single plane wave: mass |A|^2 * (2 pi L_x), coefficient A * L_x
    f = nl.Field.zeros(grid)
    amp = 0.7
    f.set_coeff(3, 1, amp * grid.l_x, 0.0)
    approx(nl.mass(f), amp**2 * 2 * math.pi * grid.l_x)
    approx(nl.hs_norm(f, 0.0), math.sqrt(nl.mass(f)))

    # multiplier closed forms: 1 below N, (|z|/N)^(s-1) above 2N
    approx(nl.m_eval(1.5, 8.0, 3.0, 0.0), 1.0)
    approx(nl.m_eval(1.5, 8.0, 32.0, 0.0), 2.0)
    assert 0 < nl.theta0((1, 0), (-1, 0), (2, 1), (-2, -1)) < 1

    # low-frequency quadruple: Lambda_4 = 1, Lambda_4-tilde = 0
    quad = [(1.0, 0.0), (-1.0, 0.0), (2.0, 1.0), (-2.0, -1.0)]
    assert nl.lambda4(1.5, 100.0, *quad) == 1.0
    assert nl.lambda4_tilde(1.5, 100.0, *quad) == 0.0
    sextet = [(1, 0), (-1, 0), (2, 1), (-2, -1), (1, 1), (-1, -1)]
    assert isinstance(nl.lambda6(1.5, 100.0, sextet), float)

    # modified energy reduces to the plain energy when N is huge
    data = nl.Field.random_band(grid, 2.0, seed=42)
    approx(data.l2_norm(), 1.0)
    quadratic, quartic, total = nl.modified_energy(data, 1.5, 1000.0)
    e = nl.energy(data)
    approx(total, e, rel=1e-9)

    # free propagation is an L^2 isometry
    moved = nl.linear_propagate(data, 0.37)
    approx(nl.mass(moved), nl.mass(data), rel=1e-12)

    # plane-wave dispersion through the splitting: phase (|z0|^2+|A|^2) t
    pw = nl.Field.zeros(grid)
    pw.set_coeff(1, 0, amp * grid.l_x, 0.0)
    dt, steps = 1e-3, 200
    u = pw
    for _ in range(steps):
        u = nl.strang_step(u, dt)
    re, im = u.coeff(1, 0)
    omega = 1.0 + amp**2
    want = amp * grid.l_x * complex(math.cos(omega * dt * steps),
                                    -math.sin(omega * dt * steps))
    got = complex(re, im)
    assert abs(got - want) <= 1e-8 * abs(want), f"{got} vs {want}"

    # short nonlinear run conserves mass (grid with dealias headroom so
    # the 2/3 cutoff sits well above the data band)
    big = nl.Grid(2 * math.pi, 64, 16)
    data = nl.Field.random_band(big, 2.0, seed=42)
    data.scale(0.1, 0.0)
    rows = nl.simulate(data, 1e-2, 0.1, s=1.5, diag_every=2)
    masses = [m for (_, m, _, _) in rows]
    assert all(abs(m - masses[0]) <= 1e-10 * masses[0] for m in masses)

    print("smoke test passed:", len(rows), "diagnostic rows")


if __name__ == "__main__":
    main()
