"""Acceptance suite: every primary criterion at its stated tolerance.

Run with ``pytest -s tests/test_acceptance.py`` to see one PASS/FAIL line
per criterion as it completes.  The full suite takes several minutes; the
heavy studies (helix increment table, 45-degree-bend convergence, roll-up
continuation) are shared session fixtures.

Known red cell: the helix MX_reduced count at slenderness 1e4 converges
here with 1 increment instead of the tabulated 2 (see the analysis in the
decisions ledger); the assertion is kept as specified.
"""

import numpy as np
import pytest

import rodfe
from rodfe import benchmarks
from rodfe import rotations as rot
from rodfe.benchmarks import (
    Q1_DB_FULL,
    Q1_DB_RED,
    Q1_MX_FULL,
    Q1_MX_RED,
    Q2_MX_FULL,
    bend45_case,
    cantilever_case,
    helix_case,
    helical_rollup_case,
)
from rodfe.errors import NonConvergence, SingularJacobian
from rodfe.newton import min_increment_search, newton_solve

from oracles import elastica_tip, rodrigues, se3_exp

HELIX_RHOS = (1.0e1, 1.0e2, 1.0e3, 1.0e4)
DB_RED_EXPECTED = {1.0e1: 128, 1.0e2: 64, 1.0e3: 128, 1.0e4: 1024}
MX_RED_EXPECTED = {1.0e1: 1, 1.0e2: 1, 1.0e3: 1, 1.0e4: 2}


#: collected criterion lines, echoed in the terminal summary (conftest)
REPORT_LINES = []


def _report_line(ok, name, detail=""):
    line = f"{'PASS' if ok else 'FAIL'}: {name}" + (f" ({detail})" if detail else "")
    REPORT_LINES.append(line)
    print("[ACCEPTANCE] " + line)
    return ok


# ----------------------------------------------------------------------
# shared studies
# ----------------------------------------------------------------------
@pytest.fixture(scope="session")
def helix_study():
    """Minimum-increment searches, the Newton reports at the minimum, and
    statistics runs on a common schedule (the DB minimum) per slenderness
    so iteration counts and rates are compared increment for increment."""
    study = {}
    for rho in HELIX_RHOS:
        case = helix_case(rho)
        for f in (Q1_MX_FULL, Q1_MX_RED, Q1_DB_RED):
            prob = case.problem(f)
            n_min = min_increment_search(prob, case.solver_config(), cap=4096)
            x, report = newton_solve(prob, case.solver_config(n_increments=n_min))
            study[(rho, f.label)] = {
                "n_min": n_min,
                "report": report,
                "problem": prob,
                "x": x,
            }
        n_common = study[(rho, "Q1_DB_reduced")]["n_min"]
        for f in (Q1_MX_FULL, Q1_MX_RED):
            prob = case.problem(f)
            _, report = newton_solve(prob, case.solver_config(n_increments=n_common))
            study[("common", rho, f.label)] = report
        study[("common", rho, "Q1_DB_reduced")] = study[(rho, "Q1_DB_reduced")]["report"]
    return study


@pytest.fixture(scope="session")
def bend45_study():
    return benchmarks.run_bend45(
        rhos=(1.0e1, 1.0e2, 1.0e3, 1.0e4),
        formulations=(Q1_MX_FULL, Q2_MX_FULL, Q1_DB_FULL),
        node_counts=(9, 17, 33, 65),
        log=lambda *a: None,
    )


@pytest.fixture(scope="session")
def rollup_study():
    case = helical_rollup_case()
    out = {}

    mx = case.problem(Q1_MX_FULL)
    x_mx, rep_mx = newton_solve(mx, case.solver_config(n_increments=64))
    out["mx"] = {
        "range": benchmarks.stress_range(benchmarks.sample_stresses(mx, x_mx)),
        "report": rep_mx,
        "problem": mx,
        "x": x_mx,
    }

    db = case.problem(Q1_DB_RED)
    try:
        newton_solve(db, case.solver_config(n_increments=1024))
        out["db_1024_failed"] = False
    except (NonConvergence, SingularJacobian) as exc:
        out["db_1024_failed"] = True
        out["db_1024_error"] = f"{type(exc).__name__}: {exc}"

    x_db, rep_db = newton_solve(db, case.solver_config(n_increments=2048))
    out["db"] = {
        "range": benchmarks.stress_range(benchmarks.sample_stresses(db, x_db)),
        "report": rep_db,
        "problem": db,
        "x": x_db,
    }
    return out


@pytest.fixture(scope="session")
def cantilever_runs():
    runs = {}
    for variant in ("unconstrained", "shear_stiff", "inextensible_shear_stiff"):
        for lc in ("force", "force_moment"):
            case = cantilever_case(variant, lc)
            prob = case.problem(Q2_MX_FULL)
            x, report = newton_solve(prob, case.solver_config())
            runs[(variant, lc)] = {"problem": prob, "x": x, "report": report,
                                   "length": case.params["length"]}
    return runs


# ----------------------------------------------------------------------
# criterion 1: helix minimum-increments table
# ----------------------------------------------------------------------
def test_helix_min_increments_mx_full(helix_study):
    counts = [helix_study[(rho, "Q1_MX_full")]["n_min"] for rho in HELIX_RHOS]
    ok = counts == [1, 1, 1, 1]
    _report_line(ok, "helix MX_full minimum increments {1,1,1,1}", f"got {counts}")
    assert ok


def test_helix_min_increments_mx_red(helix_study):
    counts = {rho: helix_study[(rho, "Q1_MX_reduced")]["n_min"] for rho in HELIX_RHOS}
    ok = all(counts[rho] == MX_RED_EXPECTED[rho] for rho in HELIX_RHOS)
    _report_line(
        ok,
        "helix MX_reduced minimum increments {1,1,1,2}",
        f"got {[counts[r] for r in HELIX_RHOS]}; the 1e4 cell is the known "
        "irreproducible borderline (see decisions ledger)",
    )
    assert ok


def test_helix_min_increments_db_red(helix_study):
    counts = {rho: helix_study[(rho, "Q1_DB_reduced")]["n_min"] for rho in HELIX_RHOS}
    ok = all(
        DB_RED_EXPECTED[rho] / 2 <= counts[rho] <= DB_RED_EXPECTED[rho] * 2
        for rho in HELIX_RHOS
    )
    _report_line(
        ok,
        "helix DB_reduced minimum increments within factor 2 of {128,64,128,1024}",
        f"got {[counts[r] for r in HELIX_RHOS]}",
    )
    assert ok


# ----------------------------------------------------------------------
# criterion 2: helix analytic stresses
# ----------------------------------------------------------------------
def test_helix_analytic_stresses(helix_study):
    rho = 1.0e1
    case = helix_case(rho)
    c1 = case.params["tip_moment"]
    R0 = case.params["R0"]
    worst_m = worst_n = 0.0
    for label in ("Q1_MX_full", "Q1_MX_reduced"):
        entry = helix_study[(rho, label)]
        prob, x = entry["problem"], entry["x"]
        stresses = benchmarks.sample_stresses(prob, x, per_element=10)
        n, m = stresses[:, 1:4], stresses[:, 4:7]
        worst_m = max(worst_m, np.abs(m - c1).max() / np.linalg.norm(c1))
        worst_n = max(worst_n, np.abs(n).max() * R0 / np.linalg.norm(c1))
    ok_m = worst_m <= 1e-6
    ok_n = worst_n <= 1e-6
    _report_line(ok_m, "helix MX moments constant at the applied tip moment",
                 f"max rel deviation {worst_m:.2e} <= 1e-6")
    _report_line(ok_n, "helix MX contact forces vanish",
                 f"max normalized force {worst_n:.2e} <= 1e-6")
    assert ok_m and ok_n


# ----------------------------------------------------------------------
# criterion 3: 45-degree bend spatial orders and locking evidence
# ----------------------------------------------------------------------
def test_bend45_spatial_orders(bend45_study):
    all_ok = True
    for res in bend45_study:
        s1 = res.slope("Q1_MX_full")
        s2 = res.slope("Q2_MX_full")
        ok = abs(s1 + 2.0) <= 0.3 and abs(s2 + 3.0) <= 0.3
        all_ok &= _report_line(
            ok,
            f"bend45 rho={res.rho:g} mixed convergence orders",
            f"Q1 slope {s1:.2f} (-2 +/- 0.3), Q2 slope {s2:.2f} (-3 +/- 0.3)",
        )
    assert all_ok


def test_bend45_locking_evidence(bend45_study):
    all_ok = True
    for res in bend45_study:
        if res.rho not in (1.0e3, 1.0e4):
            continue
        ratios = []
        for N, e_db in res.errors["Q1_DB_full"].items():
            e_mx = res.errors["Q1_MX_full"][N]
            if e_db is not None and e_mx is not None:
                ratios.append(e_db / e_mx)
        ok = max(ratios) >= 10.0
        all_ok &= _report_line(
            ok,
            f"bend45 rho={res.rho:g} locking of Q1 DB_full",
            f"max error ratio DB/MX = {max(ratios):.1f} >= 10",
        )
    assert all_ok


# ----------------------------------------------------------------------
# criterion 4: helical roll-up increments and stress fluctuation
# ----------------------------------------------------------------------
def test_rollup_increments(rollup_study):
    ok_mx = len(rollup_study["mx"]["report"].increments) == 64
    ok_db = rollup_study["db_1024_failed"]
    _report_line(ok_mx, "roll-up MX_full converges with 64 increments")
    _report_line(
        ok_db,
        "roll-up DB_reduced fails below 2048 increments",
        rollup_study.get("db_1024_error", "converged at 1024"),
    )
    assert ok_mx and ok_db


def test_rollup_stress_fluctuation(rollup_study):
    r_db = rollup_study["db"]["range"]
    r_mx = rollup_study["mx"]["range"]
    ok = r_db >= 50.0 * r_mx
    _report_line(
        ok,
        "roll-up DB contact-force range exceeds MX range by >= 50x",
        f"DB {r_db:.1f} vs MX {r_mx:.1f} (ratio {r_db / r_mx:.0f})",
    )
    assert ok


# ----------------------------------------------------------------------
# criterion 5: Newton robustness on the helix
# ----------------------------------------------------------------------
def test_newton_robustness(helix_study):
    # increment-for-increment comparison on the common schedule (the DB
    # minimum): only there are per-increment counts and rates commensurable
    all_ok = True
    for rho in HELIX_RHOS:
        rep_db = helix_study[("common", rho, "Q1_DB_reduced")]
        for label in ("Q1_MX_full", "Q1_MX_reduced"):
            rep_mx = helix_study[("common", rho, label)]
            std_mx = rep_mx.iteration_std()
            rate_mx = rep_mx.rate_geometric_mean()
            rate_db = rep_db.rate_geometric_mean()
            ok = (
                std_mx == 0.0
                and rate_mx is not None
                and rate_db is not None
                and rate_mx < rate_db
            )
            all_ok &= _report_line(
                ok,
                f"helix rho={rho:g} Newton robustness ({label})",
                f"MX iterations {rep_mx.iteration_mean():.1f} std {std_mx:.1f} "
                f"(DB {rep_db.iteration_mean():.1f} std {rep_db.iteration_std():.1f}); "
                f"rate MX {rate_mx:.2e} < DB {rate_db:.2e}",
            )
    assert all_ok


# ----------------------------------------------------------------------
# criterion 6: property suite
# ----------------------------------------------------------------------
def test_property_quaternion_map():
    rng = np.random.default_rng(100)
    worst_orth = worst_scale = 0.0
    for _ in range(500):
        P = rng.normal(size=4)
        A = rot.quat_to_rotation(P)
        worst_orth = max(
            worst_orth,
            np.abs(A.T @ A - np.eye(3)).max(),
            abs(np.linalg.det(A) - 1.0),
        )
        s = rng.uniform(0.2, 5.0) * rng.choice([-1.0, 1.0])
        worst_scale = max(worst_scale, np.abs(rot.quat_to_rotation(s * P) - A).max())
    ok = worst_orth < 1e-12 and worst_scale < 1e-12
    _report_line(ok, "quaternion map orthonormality and scale invariance",
                 f"worst {max(worst_orth, worst_scale):.2e} < 1e-12")
    assert ok


def test_property_tangent_operator():
    rng = np.random.default_rng(101)
    h, worst = 1e-6, 0.0
    for _ in range(100):
        P = rng.normal(size=4)
        P /= np.linalg.norm(P)
        dP = rng.normal(size=4)
        dA = (rot.quat_to_rotation(P + h * dP) - rot.quat_to_rotation(P - h * dP)) / (2 * h)
        M = rot.quat_to_rotation(P).T @ dA
        vee = 0.5 * np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])
        worst = max(worst, np.abs(rot.quat_tangent(P) @ dP - vee).max())
    ok = worst < 1e-6
    _report_line(ok, "tangent operator finite-difference consistency",
                 f"worst {worst:.2e} < 1e-6")
    assert ok


def test_property_spurrier_round_trip():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(1000):
        A = rot.quat_to_rotation(rng.normal(size=4))
        worst = max(worst, np.abs(rot.quat_to_rotation(rot.rotation_to_quat(A)) - A).max())
    ok = worst < 1e-12
    _report_line(ok, "Spurrier round trip", f"worst {worst:.2e} < 1e-12")
    assert ok


def test_property_objectivity():
    rng = np.random.default_rng(103)
    disc = rodfe.Discretization(p=2, n_el=4)

    def curve(xi):
        phi = xi * np.pi / 4
        return 10.0 * np.array([np.sin(phi), 1 - np.cos(phi), 0.0]), rodrigues(
            [0, 0, 1.0], phi
        )

    q = disc.initialize_from_curve(curve)
    xis = rng.uniform(0, 1, size=8)

    def strains(qv):
        rows = []
        for xi in xis:
            e = disc.element_of(xi)
            kin = disc.interpolate_kinematics(disc.element_coordinates(qv, e), xi, e)
            rows.append(np.concatenate([kin.gamma_bar, kin.kappa_bar]))
        return np.array(rows)

    base, worst = strains(q), 0.0
    for _ in range(100):
        axis = rng.normal(size=3)
        R = rodrigues(axis / np.linalg.norm(axis), rng.uniform(0, 2 * np.pi))
        tvec = rng.normal(size=3) * 5.0
        P_R = rot.rotation_to_quat(R)
        q2 = q.copy()
        for k in range(disc.n_nodes):
            q2[7 * k : 7 * k + 3] = R @ q[7 * k : 7 * k + 3] + tvec
            q2[7 * k + 3 : 7 * k + 7] = rot.quat_multiply(P_R, q[7 * k + 3 : 7 * k + 7])
        worst = max(worst, np.abs(strains(q2) - base).max())
    ok = worst < 1e-10
    _report_line(ok, "objectivity of strain measures under 100 rigid motions",
                 f"worst {worst:.2e} < 1e-10")
    assert ok


def test_property_global_jacobian():
    rng = np.random.default_rng(104)
    worst = 0.0
    for formulation in ("DB", "MX"):
        disc = rodfe.Discretization(p=2, n_el=2, formulation=formulation)
        law = rodfe.ElasticLaw.from_stiffness(*rng.uniform(0.5, 4.0, size=6))
        q0 = disc.initialize_from_curve(
            lambda xi: (np.array([1.5 * xi, 0, 0]), np.eye(3))
        )
        load = rodfe.LoadCase(
            point_loads=(
                rodfe.PointLoad(xi=1.0, force=[0.1, -0.2, 0.3]),
                rodfe.PointLoad(xi=1.0, moment=[0.1, 0.0, 0.2], frame="inertial"),
            )
        )
        prob = rodfe.StaticProblem(disc, law, q0, load, constraints=[rodfe.Clamp(xi=0.0)])
        x0 = prob.initial_state()
        for _ in range(5):
            x = x0.copy()
            x[: prob.nq] += 0.05 * rng.normal(size=prob.nq)
            x[prob.nq :] = 0.2 * rng.normal(size=prob.n_unknowns - prob.nq)
            J = prob.jacobian(x, 0.7).toarray()
            h = 1e-6
            Jfd = np.empty_like(J)
            for j in range(x.size):
                xp, xm = x.copy(), x.copy()
                xp[j] += h
                xm[j] -= h
                Jfd[:, j] = (prob.residual(xp, 0.7) - prob.residual(xm, 0.7)) / (2 * h)
            worst = max(worst, np.abs(J - Jfd).max() / max(1.0, np.abs(Jfd).max()))
    ok = worst < 1e-5
    _report_line(ok, "global Jacobian vs central differences",
                 f"worst relative deviation {worst:.2e} < 1e-5")
    assert ok


def test_property_fenchel():
    rng = np.random.default_rng(105)
    worst = 0.0
    for _ in range(200):
        law = rodfe.ElasticLaw.from_stiffness(*rng.uniform(0.1, 10.0, size=6))
        s = rodfe.StrainState.from_measures(
            rng.normal(size=3), rng.normal(size=3), np.zeros(3), np.zeros(3),
            rng.uniform(0.5, 2.0),
        )
        n, m = rodfe.contact_forces(law, s)
        gap = (
            rodfe.strain_energy(law, s)
            + rodfe.complementary_energy(law, n, m)
            - n @ s.eps_gamma
            - m @ s.eps_kappa
        )
        worst = max(worst, abs(gap) / max(1.0, abs(n @ s.eps_gamma + m @ s.eps_kappa)))
    ok = worst < 1e-12
    _report_line(ok, "Fenchel identity", f"worst {worst:.2e} < 1e-12")
    assert ok


def test_property_quadrature_exactness():
    worst = 0.0
    for m in range(1, 6):
        x, w = rodfe.gauss_rule(m, (0.0, 1.0))
        for degree in range(2 * m):
            worst = max(worst, abs(w @ x**degree - 1.0 / (degree + 1)))
    ok = worst < 1e-13
    _report_line(ok, "quadrature exactness up to degree 2m-1", f"worst {worst:.2e} < 1e-13")
    assert ok


def test_property_unit_norm_at_convergence(helix_study, cantilever_runs):
    worst = 0.0
    tol_bound = 0.0
    for entry in helix_study.values():
        if not isinstance(entry, dict):
            continue  # statistics-only entries of the common schedule
        prob, x = entry["problem"], entry["x"]
        g = prob.quaternion_constraints(x[: prob.nq])
        worst = max(worst, np.abs(g).max())
        tol_bound = max(tol_bound, entry["report"].tolerance * np.sqrt(prob.n_unknowns))
    for run in cantilever_runs.values():
        prob, x = run["problem"], run["x"]
        worst = max(worst, np.abs(prob.quaternion_constraints(x[: prob.nq])).max())
    ok = worst <= tol_bound
    _report_line(ok, "unit-norm constraints hold at all converged states",
                 f"worst {worst:.2e} <= {tol_bound:.2e}")
    assert ok


def test_property_elastica_oracle(cantilever_runs):
    all_ok = True
    for lc, lever in (("force", 0.0), ("force_moment", 2.5)):
        run = cantilever_runs[("inextensible_shear_stiff", lc)]
        prob, x, L = run["problem"], run["x"], run["length"]
        tip_node = prob.disc.n_nodes - 1
        tip = x[7 * tip_node : 7 * tip_node + 3]
        oracle = elastica_tip(10.0, L, lever=lever)
        rel = np.hypot(tip[0] - oracle[0], tip[1] - oracle[1]) / L
        all_ok &= _report_line(
            rel < 1e-3,
            f"elastica tip placement ({lc})",
            f"relative deviation {rel:.2e} < 1e-3",
        )
    assert all_ok


def test_property_se3_round_trip():
    rng = np.random.default_rng(106)
    worst = 0.0
    for _ in range(100):
        theta = rng.normal(size=6)
        theta *= rng.uniform(0, 1.0) / np.linalg.norm(theta)
        worst = max(worst, np.abs(rot.se3_log(se3_exp(theta)) - theta).max())
    ok = worst < 1e-10
    _report_line(ok, "SE(3) Log(Exp) round trip", f"worst {worst:.2e} < 1e-10")
    assert ok


def test_property_planarity(cantilever_runs):
    worst = 0.0
    for run in cantilever_runs.values():
        q = run["x"][: run["problem"].nq]
        worst = max(worst, np.abs(q.reshape(-1, 7)[:, 2]).max())
    ok = worst < 1e-10
    _report_line(ok, "cantilever deformation stays in the plane",
                 f"worst out-of-plane {worst:.2e} < 1e-10")
    assert ok
