"""Invariant suite run by ``ppw-meta validate`` on a loaded scene."""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import radiation, specfun
from .coupling import assemble_interaction
from .polarizability import element_intrinsic, passivity_check, rr_correct, scene_self_term
from .scene import AngularGrid, ObservationSet, fraunhofer_distance
from .solver import factorize, fixed_point_residual, power_report

SWEEP_RADII = (1.0, 3.0, 10.0, 30.0, 100.0)
PROJECTION_THETA_MIN = 60.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def specfun_identities():
    x = np.logspace(-1, math.log10(50.0), 200)
    j = [specfun.bessel_j(n, x) for n in range(3)]
    y = [specfun.bessel_y(n, x) for n in range(3)]
    wronskian = np.max(np.abs(j[1] * y[0] - j[0] * y[1] - 2 / (np.pi * x)) / (2 / (np.pi * x)))
    h = specfun.hankel2_all(x)
    recurrence = np.max(np.abs(h[2] - (2 / x) * h[1] + h[0]) / np.abs(h[2]))
    m = np.linspace(0.01, 0.99, 99)
    km, k1 = specfun.elliptic_k(m), specfun.elliptic_k(1 - m)
    em, e1 = specfun.elliptic_e(m), specfun.elliptic_e(1 - m)
    legendre = np.max(np.abs(em * k1 + e1 * km - km * k1 - np.pi / 2) / (np.pi / 2))
    return [
        CheckResult("wronskian", wronskian < 1e-10, f"max rel residual {wronskian:.2e} (< 1e-10)"),
        CheckResult("hankel recurrence", recurrence < 1e-12, f"max rel residual {recurrence:.2e} (< 1e-12)"),
        CheckResult("legendre relation", legendre < 1e-12, f"max rel residual {legendre:.2e} (< 1e-12)"),
    ]


def scene_anchors(scene):
    k = scene.k
    size = max(k * 2 * e.l1 for e in scene.elements)
    out = [CheckResult("electrical size", True, f"max k*(2*l1) = {size:.4f}")]
    if scene.plate_size is not None:
        out.append(CheckResult("fraunhofer distance", True, f"{fraunhofer_distance(scene):.4f} m"))
    return out


def interaction_structure(scene):
    g = assemble_interaction(scene)
    n = scene.n_elements
    asym = np.max(np.abs(g - g.T)) / max(np.max(np.abs(g)), 1e-300)
    diag = max((np.max(np.abs(g[2 * i:2 * i + 2, 2 * i:2 * i + 2])) for i in range(n)), default=0.0)
    ok = asym <= 1e-15 and diag == 0.0
    return [CheckResult("interaction symmetry", ok, f"rel asymmetry {asym:.1e}, max |diag block| {diag:.1e}")]


def passivity(scene):
    g0 = scene_self_term(scene)
    worst = math.inf
    lossless_dev = 0.0
    passive = True
    for e in scene.elements:
        report = passivity_check(rr_correct(element_intrinsic(e), g0), g0)
        passive &= report.passive
        worst = min(worst, report.min_eigenvalue)
        if e.loss_delta == 0 and e.intrinsic_override is None:
            lossless_dev = max(lossless_dev, abs(report.min_eigenvalue))
    tol = 1e-9 * abs(g0.value)
    ok = passive and lossless_dev <= tol
    return [CheckResult("passivity", ok, f"min eigenvalue {worst:.3e}; lossless deviation "
                                         f"{lossless_dev:.1e} (<= {tol:.1e})")]


def solve_checks(scene):
    system = factorize(scene)
    m = system.moments()
    residual = fixed_point_residual(scene, None, m)
    report = power_report(scene, moments=m)
    scale = max(float(np.max(report.supplied)), 0.0)
    tol = 1e-9 * scale
    slack = float(np.min(report.margins)) if len(report.margins) else 0.0
    lossless = [i for i, e in enumerate(scene.elements) if e.loss_delta == 0 and e.intrinsic_override is None]
    balance = max((abs(report.margins[i]) for i in lossless), default=0.0)
    return [
        CheckResult("fixed-point residual", residual < 1e-10, f"{residual:.2e} (< 1e-10), cond {system.condition:.2e}"),
        CheckResult("power balance", slack >= -tol and balance <= tol,
                    f"min P_sup-P_rad {slack:.3e} W; lossless |P_sup-P_rad| {balance:.1e} (<= {tol:.1e})"),
    ], m


def projection_far_limit(scene, scale=1000.0, theta_min_deg=PROJECTION_THETA_MIN, step_deg=2.0):
    """Worst ||T - I||_F over a (theta >= theta_min) band at R = scale * max ||r_n||.

    The basis twist grows like (r/R) cot(theta), so the polar cap is excluded.
    """
    r_max = max(float(np.max(np.linalg.norm(scene.element_positions, axis=1))), 1e-3)
    band = AngularGrid(theta_min_deg, 90.0, step_deg, 0.0, 360.0, step_deg)
    pts = scale * r_max * band.directions().reshape(-1, 3)
    t = radiation._projections(scene, pts)
    return float(np.max(np.linalg.norm(t - np.eye(2), axis=(-2, -1))))


def nf_ff_sweep(scene, moments, step_deg=2.0):
    grid = AngularGrid(theta_step=step_deg, phi_step=step_deg)
    ff = radiation.pattern(scene, ObservationSet("ff", 1.0, grid), moments=moments)
    errors = [radiation.pattern_error(radiation.pattern(scene, ObservationSet("nf", r, grid), moments=moments),
                                      ff, grid) for r in SWEEP_RADII]
    decreasing = all(b < a for a, b in zip(errors, errors[1:]))
    ok = decreasing and errors[-1] < 1.0
    detail = ", ".join(f"{r:g} m: {e:.3f}%" for r, e in zip(SWEEP_RADII, errors))
    dev = projection_far_limit(scene)
    return [CheckResult("nf->ff convergence", ok, detail),
            CheckResult("projection far limit", dev < 1e-3, f"max ||T - I||_F = {dev:.2e} (< 1e-3, theta >= {PROJECTION_THETA_MIN:g} deg)")]


def run_checks(scene, step_deg=2.0):
    results = []
    results += specfun_identities()
    results += scene_anchors(scene)
    results += interaction_structure(scene)
    results += passivity(scene)
    solved, m = solve_checks(scene)
    results += solved
    results += nf_ff_sweep(replace(scene, observation=None), m, step_deg)
    return results
