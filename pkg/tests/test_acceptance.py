"""Acceptance criteria for the ellipse benchmark.

Each criterion runs at its stated tolerance and records one PASS/FAIL line,
shown in the pytest terminal summary and printed when run as a script.
Reference rows are the published benchmark tables (L-inf, L2, semi-H1 at
T = 1 with dt = 2h) for N = 10, 20, 40, 80, 160.
"""
import time
from functools import lru_cache

import numpy as np
import pytest

from ppife import linalg, timestep
from ppife.assembly import DirichletSystem, PenaltyConfig, assemble_mass, assemble_stiffness
from ppife.basis import constraint_residuals, partition_residual
from ppife.estimator import PPIFESolver
from ppife.linalg import condition_estimate, is_symmetric
from ppife.problem import EllipseProblem, FunctionProblem
from ppife.study import PRESETS, RunConfig, run_study
from ppife.timestep import ELLIPTIC_PROJECTION, ThetaSchemeConfig, ThetaStepper, run_transient

from conftest import ACCEPTANCE_LINES, make_space

pytestmark = pytest.mark.slow

STUDY = (10, 20, 40, 80, 160)

REFERENCE = {
    "table1": dict(
        linf=[2.7866e-2, 7.9371e-3, 2.6530e-3, 8.9636e-4, 3.3405e-4],
        l2=[8.2619e-2, 2.0935e-2, 5.3984e-3, 1.4473e-3, 4.1586e-4],
        h1=[2.1079, 1.0659, 0.53875, 0.27065, 0.13567],
        l2_rate=[1.9805, 1.9553, 1.8991, 1.7992]),
    "table2": dict(
        linf=[6.6821e-2, 1.5332e-2, 5.1586e-3, 1.5387e-3, 4.9034e-4],
        l2=[8.1952e-2, 2.1070e-2, 5.4326e-3, 1.4582e-3, 4.1727e-4],
        h1=[2.1051, 1.0654, 0.53876, 0.27067, 0.13567],
        l2_rate=[1.9596, 1.9554, 1.8974, 1.8052]),
    "table3": dict(
        linf=[5.1829e-2, 1.0369e-2, 2.8024e-3, 7.1649e-4, 1.7881e-4],
        l2=[9.3610e-2, 2.2475e-2, 5.6292e-3, 1.4091e-3, 3.5445e-4],
        h1=[2.1106, 1.0658, 0.53870, 0.27063, 0.13566]),
    "table4": dict(
        # the N = 80 L-inf entry is printed as 1.0893e-4, out of line with its
        # neighbours; it is not used by any criterion
        linf=[1.0310e-1, 1.4252e-2, 4.2963e-3, 1.0893e-4, 2.8178e-4],
        l2=[9.2384e-2, 2.2543e-2, 5.6546e-3, 1.4190e-3, 3.5605e-4],
        h1=[2.1112, 1.0650, 0.53862, 0.27062, 0.13566]),
    "table5": dict(
        linf=[1.4637e-1, 6.4974e-2, 2.2137e-2, 7.2728e-3, 2.3746e-3],
        l2=[4.7718e-2, 1.6100e-2, 4.3284e-3, 8.4067e-4, 2.0844e-4],
        h1=[1.1268, 0.59288, 0.30548, 0.15187, 0.075576]),
    "table6": dict(
        linf=[1.9919e-1, 4.8082e-2, 1.4716e-2, 5.0467e-3, 1.6228e-3],
        l2=[5.2179e-2, 1.5609e-2, 4.2141e-3, 8.1261e-4, 1.9588e-4],
        h1=[1.1724, 0.57800, 0.29879, 0.14997, 0.075188]),
}


@lru_cache(maxsize=None)
def study(name):
    cfg = RunConfig(study=STUDY, **PRESETS[name])
    t0 = time.perf_counter()
    report = run_study(cfg)
    return report, time.perf_counter() - t0


def record(label, failures, detail=""):
    status = "PASS" if not failures else "FAIL"
    line = f"{label}: {status}"
    if failures:
        line += " - " + "; ".join(failures)
    elif detail:
        line += " - " + detail
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failures, line


def columns(report):
    recs = report.records
    out = {n: np.array([getattr(r, n) for r in recs]) for n in ("linf", "l2", "h1")}
    for n in ("l2", "h1"):
        out[n + "_rate"] = np.array([r.rates[n] for r in recs[1:]])
    return out


def within_rel(failures, tag, got, ref, rel):
    for n, g, r in zip(STUDY, got, ref):
        if abs(g - r) > rel * r:
            failures.append(f"{tag} N={n} {g:.4e} vs {r:.4e}")


def within_factor(failures, tag, got, ref, factor):
    for n, g, r in zip(STUDY, got, ref):
        if not r / factor <= g <= r * factor:
            failures.append(f"{tag} N={n} {g:.4e} vs {r:.4e}")


def rates_near(failures, tag, rates, target, tol, pairs):
    for i in pairs:
        if abs(rates[i] - target[i]) > tol:
            failures.append(f"{tag} rate {STUDY[i]}->{STUDY[i + 1]} {rates[i]:.4f}")


def first_order_bilinear_checks(name, failures):
    report, seconds = study(name)
    ref = REFERENCE[name]
    if not report.ok:
        failures.append(f"study failed: {report.failures}")
        return report
    c = columns(report)
    within_rel(failures, "H1", c["h1"], ref["h1"], 0.20)
    if not 0.90 <= c["h1_rate"][-1] <= 1.10:
        failures.append(f"final H1 rate {c['h1_rate'][-1]:.4f}")
    within_rel(failures, "L2", c["l2"], ref["l2"], 0.30)
    rates_near(failures, "L2", c["l2_rate"], ref["l2_rate"], 0.2, range(4))
    within_factor(failures, "Linf", c["linf"], ref["linf"], 2.0)
    if seconds > 300.0:
        failures.append(f"runtime {seconds:.0f}s")
    return report


def test_criterion1_backward_euler_nonsymmetric():
    failures = []
    report = first_order_bilinear_checks("table1", failures)
    record("C1 table1 BE eps=1", failures, f"H1 rates {np.round(columns(report)['h1_rate'], 4)}")


def test_criterion2_backward_euler_symmetric(monkeypatch):
    failures = []
    first_order_bilinear_checks("table2", failures)

    solver = PPIFESolver(n_side=20, **{k: v for k, v in PRESETS["table2"].items()
                                       if k not in ("beta_minus", "beta_plus")})
    prob = EllipseProblem(1.0, 10.0)
    calls = {"cg": 0, "bicgstab": 0}
    real_cg, real_bicg = linalg.cg, linalg.bicgstab

    def spy_cg(*a, **k):
        calls["cg"] += 1
        return real_cg(*a, **k)

    def spy_bicg(*a, **k):
        calls["bicgstab"] += 1
        return real_bicg(*a, **k)

    monkeypatch.setattr(timestep, "cg", spy_cg)
    monkeypatch.setattr(timestep, "bicgstab", spy_bicg)
    solver.fit(prob)
    stepper = ThetaStepper(solver.mass_, solver.stiffness_, solver.scheme_.dt, 1.0,
                           solver.space_.boundary_dofs, symmetric=True)
    if not is_symmetric(stepper.composite) or not is_symmetric(stepper.matrix):
        failures.append("composite operator not exactly symmetric")
    if (solver.stiffness_ != solver.stiffness_.T).nnz:
        failures.append("stiffness not exactly symmetric")
    if calls["cg"] == 0 or calls["bicgstab"]:
        failures.append(f"solver calls {calls}")
    record("C2 table2 BE eps=-1", failures, f"cg calls {calls['cg']}, composite symmetric")


def crank_nicolson_checks(name, label):
    failures = []
    report, _ = study(name)
    ref = REFERENCE[name]
    if not report.ok:
        failures.append(f"study failed: {report.failures}")
    else:
        c = columns(report)
        rates_near(failures, "L2", c["l2_rate"], [2.0] * 4, 0.1, (1, 2, 3))
        rates_near(failures, "H1", c["h1_rate"], [1.0] * 4, 0.1, range(4))
        within_rel(failures, "L2", c["l2"], ref["l2"], 0.30)
    record(label, failures, f"L2 rates {np.round(columns(report)['l2_rate'], 4)}")


def test_criterion3_crank_nicolson_nonsymmetric():
    crank_nicolson_checks("table3", "C3 table3 CN eps=1")


def test_criterion4_crank_nicolson_symmetric():
    crank_nicolson_checks("table4", "C4 table4 CN eps=-1")


def test_criterion5_large_contrast():
    failures = []
    for name in ("table5", "table6"):
        report, _ = study(name)
        if not report.ok:
            failures.append(f"{name} study failed: {report.failures}")
            continue
        c, ref = columns(report), REFERENCE[name]
        rates_near(failures, f"{name} H1", c["h1_rate"], [1.0] * 4, 0.15, (2, 3))
        for norm in ("linf", "l2", "h1"):
            within_factor(failures, f"{name} {norm}", c[norm], ref[norm], 2.0)
        if name == "table6":
            for i, r in enumerate(c["l2_rate"]):
                if not 1.8 <= r <= 2.5:
                    failures.append(f"table6 L2 rate {STUDY[i]}->{STUDY[i + 1]} {r:.4f}")
    record("C5 beta=(1,1e4) BE and CN", failures)


def _interface_points(prob, n):
    th = np.linspace(0.0, np.pi / 2, n)
    return prob.x0 + prob.a * np.cos(th), prob.y0 + prob.b * np.sin(th)


def test_criterion6_property_suite():
    failures = []
    for beta in ((1.0, 10.0), (1.0, 10000.0)):
        for n in (10, 40, 160):
            space = make_space(n, beta)
            worst_c = worst_p = 0.0
            for k in space.classification.interface_elements:
                b = space.element_basis(k)
                res = constraint_residuals(b, space.mesh.element_rect(k), *beta)
                worst_c = max(worst_c, np.abs(res).max())
                worst_p = max(worst_p, partition_residual(b))
            if worst_c > 1e-10:
                failures.append(f"(a) beta={beta} N={n} residual {worst_c:.1e}")
            if worst_p > 1e-12:
                failures.append(f"(b) beta={beta} N={n} partition {worst_p:.1e}")

    space = make_space(40)
    for cfg in (PenaltyConfig(1, 1.0), PenaltyConfig(0, 10.0), PenaltyConfig(-1, 100.0)):
        A = assemble_stiffness(space, cfg)
        r = np.abs(A @ np.ones(space.n_dofs)).max() / abs(A).sum(axis=1).max()
        if r > 1e-12:
            failures.append(f"(c) eps={cfg.epsilon} A*1 {r:.1e}")
        if cfg.epsilon == -1 and (A != A.T).nnz:
            failures.append("(d) A not exactly symmetric")

    rng = np.random.default_rng(7)
    for beta in ((1.0, 10.0), (1.0, 10000.0)):
        prob = EllipseProblem(*beta)
        checked = 0
        while checked < 100:
            x, y = rng.uniform(0.0, 1.0, 2)
            if abs(prob.r(x, y) - 1.0) <= 0.05:
                continue
            checked += 1
            side, t, d = prob.side(x, y), 0.5, 1e-4
            u = lambda X, Y: prob.exact_u(X, Y, t, side=side)
            lap = (u(x + d, y) + u(x - d, y) + u(x, y + d) + u(x, y - d) - 4 * u(x, y)) / d**2
            f_fd = u(x, y) - prob.beta_at(x, y) * lap
            f = prob.source_f(x, y, t)
            if abs(f - f_fd) > 1e-5 * max(abs(f), 1.0):
                failures.append(f"(e) beta={beta} ({x:.3f},{y:.3f})")

        x, y = _interface_points(prob, 50)
        n = prob.curve.normal(x, y)
        for t in (0.0, 1.0):
            jump = np.abs(prob.exact_u(x, y, t, side=1) - prob.exact_u(x, y, t, side=-1)).max()
            fm = prob.beta_minus * np.einsum("ij,ij->i", prob.exact_grad_u(x, y, t, side=-1), n)
            fp = prob.beta_plus * np.einsum("ij,ij->i", prob.exact_grad_u(x, y, t, side=1), n)
            if max(jump, np.abs(fp - fm).max()) > 1e-9:
                failures.append(f"(f) beta={beta} t={t}")
    record("C6 property suite", failures)


def test_criterion7_condition_scaling():
    cfg = PenaltyConfig(-1, 100.0)
    conds = []
    for n in (10, 20, 40):
        space = make_space(n)
        A = assemble_stiffness(space, cfg)
        conds.append(condition_estimate(DirichletSystem(A, space.boundary_dofs).matrix))
    ratios = [b / a for a, b in zip(conds, conds[1:])]
    failures = [f"growth {r:.2f}" for r in ratios if not 2.5 <= r <= 6.0]
    record("C7 condition growth", failures, f"growth per doubling {np.round(ratios, 2)}")


def test_criterion8_initial_condition_equivalence():
    prob = EllipseProblem(1.0, 10.0)
    h1 = {}
    for init in ("interpolation", ELLIPTIC_PROJECTION):
        solver = PPIFESolver(n_side=40, theta=1.0, epsilon=1, sigma0=1.0, init=init)
        h1[init] = solver.fit(prob).error_record().h1
    a, b = h1.values()
    diff = abs(a - b) / min(a, b)
    failures = [] if diff < 0.05 else [f"relative difference {diff:.3f}"]
    record("C8 initial condition", failures, f"H1 {a:.5f} vs {b:.5f}")


def test_criterion9_energy_decay():
    space = make_space(20)
    cfg = PenaltyConfig(-1, 100.0)
    M, A = assemble_mass(space), assemble_stiffness(space, cfg)
    rng = np.random.default_rng(2024)
    u0 = rng.standard_normal(space.n_dofs)
    u0[space.boundary_dofs] = 0.0
    prob = FunctionProblem(EllipseProblem().curve, 1.0, 10.0)
    sol = run_transient(space, cfg, ThetaSchemeConfig(1.0, 1.0, 50), prob, u_init=u0,
                        stride=1, M=M, A=A)
    energy = [float(np.sqrt(u @ (M @ u))) for u in sol.coeffs]
    bad = [n for n, (e0, e1) in enumerate(zip(energy, energy[1:]), 1) if e1 > e0]
    failures = [f"increase at steps {bad[:5]}"] if bad else []
    if len(energy) != 51:
        failures.append(f"{len(energy) - 1} steps recorded")
    record("C9 energy decay", failures, f"{energy[0]:.4f} -> {energy[-1]:.4e}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
