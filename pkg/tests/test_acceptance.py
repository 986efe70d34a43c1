"""Acceptance criteria 1-8, one PASS/FAIL line each at the stated tolerances.

Run alone with ``pytest tests/test_acceptance.py -v -s``; the lines are printed
even without ``-s``.
"""
import math
import os
import time

import numpy as np
import pytest

from fracutm import cli, suites, utm
from fracutm import symbolgeo as sg

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def report(capsys, n, name, checks, seconds, budget):
    """checks: (label, value, limit) meaning value <= limit, or (label, value, limit, ">=")."""
    ok = seconds <= budget
    parts = []
    for c in checks:
        lab, v, lim = c[:3]
        op = c[3] if len(c) > 3 else "<="
        ok &= bool(v >= lim if op == ">=" else v <= lim)
        parts.append(f"{lab} {v:.3e} ({op} {lim:.1e})")
    detail = "; ".join(parts)
    with capsys.disabled():
        print(f"\nCRITERION {n} {'PASS' if ok else 'FAIL'} {name}: {detail}; "
              f"runtime {seconds:.1f}s (limit {budget:.0f}s)")
    assert ok


def test_criterion_1_classical_reduction(capsys):
    t0 = time.perf_counter()
    xs, ts = np.array([0.25, 0.5, 1.0, 2.0]), np.array([0.1, 0.25, 0.5])
    q, _ = utm.solve(suites.heat_spec()).grid(xs, ts)
    ref = np.array([utm.heat_oracle(1, 1, xs, t) for t in ts])
    err = float(np.max(np.abs(q - ref)))
    spot = abs(q[1, 2] - 0.2144410)
    report(capsys, 1, "alpha=2 vs heat oracle",
           [("max abs error", err, 1e-3), ("q(1,0.25) vs 0.2144410", spot, 5e-8)],
           time.perf_counter() - t0, 60)


def test_criterion_2_fractional_run(capsys):
    t0 = time.perf_counter()
    sp = suites.fractional_spec()
    field = utm.solve(sp)
    rng = np.random.default_rng(2024)
    ks = rng.uniform(-2, 2, 20) - 1j * rng.uniform(0.1, 2, 20)
    gr = utm.gr_report(sp, field, ks, [0.125, 0.25])
    pde = utm.pde_residual(field, sp)
    x = np.array([0.5, 1.0, 2.0])
    init = float(np.max(np.abs(field.evaluate(x, 1e-3)[0] - x * np.exp(-x * x))))
    report(capsys, 2, "alpha=2.2 self-consistency",
           [("GR residual / (1+|q0hat|)", gr.max, 1e-3), ("PDE relative residual", pde.relative, 5e-2),
            ("initial recovery", init, 5e-3)],
           time.perf_counter() - t0, 300)


def test_criterion_3_region_geometry(capsys):
    t0 = time.perf_counter()
    dis = suites.region_disagreements((1.6, 2.0, 2.2, 2.4))
    emp = suites.emptiness_violations((1.1, 1.3, 1.5))
    report(capsys, 3, "D+ sectors vs indicator sampling",
           [("disagreements", dis, 0), ("emptiness violations", emp, 0)],
           time.perf_counter() - t0, 5)


def test_criterion_4_admissibility(capsys):
    t0 = time.perf_counter()
    table = {0.5: False, 1: True, 1.2: True, 2: True, 3: True, 3.5: False, 5.5: True}
    bad = sum(sg.monomial_admissible(a) is not v for a, v in table.items())
    report(capsys, 4, "admissibility table", [("mismatches", bad, 0)],
           time.perf_counter() - t0, 1)


def test_criterion_5_fractional_operators(capsys):
    t0 = time.perf_counter()
    checks = [
        ("power rule", suites.power_rule_error(), 1e-4),
        ("semigroup", suites.semigroup_defect(), 1e-4),
        ("composition defect", suites.composition_defect(), 1e-3),
        ("integration by parts", suites.integration_by_parts_residual(), 1e-3),
        ("RL vs GL", suites.gl_agreement(), 1e-3),
    ]
    report(capsys, 5, "fractional-operator suite", checks, time.perf_counter() - t0, 60)


def test_criterion_6_nu_maps(capsys):
    t0 = time.perf_counter()
    pres = suites.nu_preservation((2.0, 2.2), 100)
    # the window computed from the rotated rays, compared with (7/5, 7/3)
    bad = suites.nu_window_mismatches()
    for a in np.linspace(1.005, 2.495, 150):
        bad += bool(sg.nu_candidates(a)) != (7 / 5 < a < 7 / 3)
    report(capsys, 6, "nu-map preservation and window (7/5, 7/3)",
           [("w-preservation (relative)", pres, 1e-12), ("window mismatches", bad, 0)],
           time.perf_counter() - t0, 5)


def test_criterion_7_self_convergence(capsys):
    t0 = time.perf_counter()
    checks = []
    for name in ("heat.json", "frac22.json"):
        cfg = cli.load_config(os.path.join(CONFIGS, name))
        res = cli.convergence_study(cfg, 3)
        order = res["observed_order"]
        value = math.inf if order == "inf" else order
        diffs = ", ".join(f"{d:.1e}" for d in res["differences"])
        checks.append((f"{name} order (diffs {diffs})", value, 1.0, ">="))
    report(capsys, 7, "node-doubling self-convergence", checks, time.perf_counter() - t0, 600)


def test_criterion_8_deformation_independence(capsys):
    t0 = time.perf_counter()
    ratio = suites.deformation_ratio()
    report(capsys, 8, "eps_rot in {0.03, 0.05, 0.08}",
           [("max |diff| / (3 x error estimate)", ratio, 1.0)], time.perf_counter() - t0, 300)
