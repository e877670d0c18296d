"""The release acceptance suite as a library of criterion checks.

Each criterion function returns a list of :class:`Record`; the CLI ``all``
command and the pytest acceptance module both consume these, so the two
entry points cannot drift apart.  Tolerances are fixed here, not at call
sites.

Numerical conventions decided during calibration:

* first/second-variation relative discrepancy is measured against
  |formula| + Phi-area/10 (an absolute floor; stationary charts have an
  identically zero first variation, so a bare relative test is vacuous);
* observed refinement order must reach 1.8 unless the baseline
  discrepancy is already at the floor (rel <= 1e-4), where slopes are
  noise;
* catalog baselines: 33^2 (n=2, partner 17^2), 25^3 (n=3, partner 13^3).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import conformal as cf
from . import constants as co
from . import geometry as geo
from . import inequalities as iq
from . import integrand as ig
from . import mubble as mb
from . import variation as va

SQRT2 = math.sqrt(2.0)

RES_2D = (17, 33)
RES_3D = (13, 25)
REL_TOL = 1e-3
ORDER_MIN = 1.8
ORDER_FLOOR_REL = 1e-4


@dataclass
class Record:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        d = {"name": self.name, "value": self.value, "tolerance": self.tolerance,
             "pass": bool(self.passed)}
        if self.detail:
            d["detail"] = self.detail
        return d


def _rec_le(name, value, tol, **detail):
    return Record(name, float(value), float(tol), bool(value <= tol), detail)


def _rec_ge(name, value, bound, **detail):
    return Record(name, float(value), float(bound), bool(value >= bound), detail)


# -- criterion 1: explicit constants --------------------------------------------


def criterion_constants():
    t0 = time.perf_counter()
    recs = []
    lam = co.spectral_lambda(3, 1.0 / SQRT2, co.C0)
    lam_closed = 3.0 * (5.0 + 3.0 * SQRT2) / 56.0
    recs.append(_rec_le("lambda vs 3(5+3sqrt2)/56 (rel)",
                        abs(lam - lam_closed) / lam_closed, 1e-14))
    recs.append(_rec_le("c0 vs 1/(sqrt2 - 1/2) (rel)",
                        abs(co.C0 - 1.0 / (SQRT2 - 0.5)) / co.C0, 1e-14))
    recs.append(_rec_le("c0 approximately 1.09", abs(co.C0 - 1.09), 5e-3))
    mc = co.minimal_case_constants()
    vol_ref = (32.0 * math.pi / 3.0) ** 1.5 * math.exp(30.0 * math.pi / math.sqrt(3.0)) \
        / (6.0 * math.sqrt(math.pi))
    recs.append(_rec_le("minimal volume coefficient (rel)",
                        abs(mc.value("volume_coefficient") - vol_ref) / vol_ref, 1e-14))
    recs.append(_rec_le("minimal rho0 vs e^(-10pi/sqrt3) (rel)",
                        abs(mc.value("rho0_min_case") - math.exp(-10 * math.pi / math.sqrt(3.0)))
                        / mc.value("rho0_min_case"), 1e-14))
    recs.append(_rec_le("minimal area bound vs 32pi/3 (rel)",
                        abs(mc.value("area_bound_min_case") - 32 * math.pi / 3)
                        / (32 * math.pi / 3), 1e-14))
    recs.append(_rec_le("minimal diameter bound vs 4pi/sqrt3 (rel)",
                        abs(mc.value("diameter_bound_min_case") - 4 * math.pi / math.sqrt(3.0))
                        / (4 * math.pi / math.sqrt(3.0)), 1e-14))
    table = co.build_table()
    recs.append(_rec_le("worst expression rederivation error",
                        max(e.rederivation_error() for e in table.entries.values()), 1e-14))
    recs.append(_rec_le("lambda pipeline uses no hand-entered minimal value",
                        abs(co.spectral_lambda(3, 1.0, 1.0) - mc.value("lambda_min_case")), 0.0))
    c0, beta = co.c0_and_beta()
    recs.append(_rec_le("beta route cross-check residual",
                        abs(0.5 * 3 * (0.5 - 0.5 / beta) - lam), 1e-14))
    recs.append(_rec_le("criterion runtime (s)", time.perf_counter() - t0, 1.0))
    return recs


# -- criterion 2: quadratic form comparison sweep -------------------------------


def criterion_quadratic_lemma():
    t0 = time.perf_counter()
    rep = iq.verify_quadratic_lemma(200, 200, 720)
    recs = [_rec_ge(f"sweep {r.name}", r.margin, -r.tolerance, config=r.config)
            for r in rep.records]
    recs.append(_rec_le("max Q1/Q2 vs c0", rep.extras["max_ratio_q1_q2"] - iq.C0, 1e-12))
    cfg = rep.records[0].config
    m1, _, _ = iq.quadratic_lemma_point(cfg["alpha"], cfg["beta"], cfg["theta"])
    recs.append(_rec_le("argmin reproduction error", abs(m1 - rep.records[0].margin), 1e-14))
    recs.append(Record("q2 positive everywhere", rep.extras["q2_nonpositive_count"], 0.0,
                       rep.extras["q2_nonpositive_count"] == 0))
    recs.append(_rec_le("criterion runtime (s)", time.perf_counter() - t0, 30.0))
    return recs


# -- criterion 3: curvature and Ricci sweeps -------------------------------------


def criterion_curvature_ricci(samples=1_000_000, seed=1234):
    t0 = time.perf_counter()
    crep = iq.verify_curvature_pinch(samples, seed=seed)
    recs = [_rec_ge(f"curvature {r.name}", r.margin, -r.tolerance) for r in crep.records]
    recs.append(_rec_le("curvature constraint residual",
                        crep.extras["max_constraint_residual"], 1e-12))
    recs.append(_rec_ge("near-sharp ratio >= c0 - 0.05",
                        crep.extras["max_ratio_A2_over_negR"], iq.C0 - 0.05))
    recs.append(_rec_le("ratio stays below c0",
                        crep.extras["max_ratio_A2_over_negR"] - iq.C0, 1e-12))
    rrep = iq.verify_ricci_bound(samples, seed=seed)
    recs += [_rec_ge(f"ricci {r.name}", r.margin, -r.tolerance) for r in rrep.records]
    recs.append(_rec_le("criterion runtime (s)", time.perf_counter() - t0, 60.0))
    return recs


# -- criterion 4: improved Kato spot check ----------------------------------------


def criterion_kato(points=10_000, seed=1234):
    t0 = time.perf_counter()
    rep = iq.verify_kato(points, seed=seed)
    recs = [_rec_ge(f"{r.name}", r.margin, -r.tolerance) for r in rep.records]
    m = iq.kato_point("xy", [0.37, -0.61, 0.11])
    recs.append(_rec_le("xy closed form margin = 1/2", abs(m - 0.5), 1e-12))
    recs.append(_rec_le("criterion runtime (s)", time.perf_counter() - t0, 10.0))
    return recs


# -- criterion 5: first/second variation vs oracles -------------------------------


def _variation_order_rule(rel, order, floor=ORDER_FLOOR_REL):
    return rel <= REL_TOL and (order >= ORDER_MIN or rel <= floor)


def variation_consistency_cases(kind="first"):
    """All (catalog chart x catalog integrand x bump) discrepancy pairs.

    ``kind='second'`` restricts to phi-stationary combinations, where the
    second-variation formula applies.
    """
    cases = []
    for n, d, res_pair in ((2, 3, RES_2D), (3, 4, RES_3D)):
        for cname, chart in geo.catalog(n).items():
            for iname, integ in ig.catalog(d).items():
                if kind == "second":
                    g_probe = geo.sample_chart(chart, res_pair[0])
                    if not va.is_phi_stationary(g_probe, integ):
                        continue
                for bump in va.BUMP_NAMES:
                    discs, rels = [], []
                    for res in res_pair:
                        g = geo.sample_chart(chart, res)
                        u = va.bump_function(g, bump)
                        if kind == "first":
                            chk = va.first_variation_check(g, integ, u)
                        else:
                            chk = va.second_variation_check(g, integ, u)
                        discs.append(chk.discrepancy)
                        rels.append(chk.rel_discrepancy)
                    order = (np.inf if discs[1] < 1e-11
                             else np.log2(max(discs[0], 1e-300) / discs[1]))
                    cases.append({"n": n, "chart": cname, "integrand": iname,
                                  "bump": bump, "rel": rels[-1], "order": float(order),
                                  "discrepancies": discs})
    return cases


def criterion_variation():
    t0 = time.perf_counter()
    recs = []
    # the second-difference oracle has a higher noise floor (t^4 times the
    # fourth time-derivative of the functional), so its order waiver sits
    # at 5e-4 instead of 1e-4
    for kind, floor in (("first", ORDER_FLOOR_REL), ("second", 5e-4)):
        cases = variation_consistency_cases(kind)
        worst_rel = max(c["rel"] for c in cases)
        violations = [c for c in cases
                      if not _variation_order_rule(c["rel"], c["order"], floor)]
        recs.append(_rec_le(f"{kind} variation worst relative discrepancy",
                            worst_rel, REL_TOL, cases=len(cases)))
        recs.append(Record(f"{kind} variation order rule violations",
                           len(violations), 0.0, not violations,
                           {"violations": violations[:5]}))
    # isotropic reduction identities
    worst_h = 0.0
    worst_psi = 0.0
    for n, d in ((2, 3), (3, 4)):
        iso = ig.Integrand.isotropic(d)
        for chart in geo.catalog(n).values():
            g = geo.sample_chart(chart, 11)
            worst_h = max(worst_h, float(np.abs(
                va.aniso_mean_curvature(g, iso) - g.mean_curvature).max()))
            psi = iso.hessian(g.nu)
            for a in range(n):
                w = g.jac[..., a]
                worst_psi = max(worst_psi, float(np.abs(
                    np.einsum("...de,...e->...d", psi, w) - w).max()))
    recs.append(_rec_le("isotropic reduction |H_phi - tr S|", worst_h, 1e-10))
    recs.append(_rec_le("isotropic reduction |Psi w - w|", worst_psi, 1e-12))
    recs.append(_rec_le("criterion runtime (s)", time.perf_counter() - t0, 300.0))
    return recs


# -- criterion 6: vector-field identity and isoperimetric comparison --------------


def criterion_vectorfield_isoperimetric():
    t0 = time.perf_counter()
    recs = []
    plane0 = geo.sample_chart(geo.Hyperplane(3, offset=0.0, box=[(-1, 1)] * 3), 13)
    fields = {"position": va.VectorField.position(),
              "constant_e1": va.VectorField.constant([1.0, 0, 0, 0]),
              "linear_diag": va.VectorField.linear(np.diag([1.0, 2.0, 0.5, 1.0]))}
    for iname, integ in ig.catalog(4).items():
        for fname, fld in fields.items():
            res, _, _, _ = va.vectorfield_first_variation(plane0, integ, fld)
            recs.append(_rec_le(f"plane identity [{iname} x {fname}]", res, 1e-6))
    # refinement of the residual on curved stationary charts
    for label, chart, integ, pair in (
            ("catenoid_2", geo.catalog(2)["catenoid_2"], ig.Integrand.isotropic(3), RES_2D),
            ("catenoid_3", geo.catalog(3)["catenoid_3"], ig.Integrand.isotropic(4), RES_3D)):
        resids = []
        for res in pair:
            g = geo.sample_chart(chart, res)
            r, interior, _, stat = va.vectorfield_first_variation(
                g, integ, va.VectorField.position())
            resids.append(r)
        order = np.inf if resids[1] < 1e-12 else np.log2(resids[0] / resids[1])
        recs.append(Record(f"{label} position-field residual order", float(order),
                           ORDER_MIN, order >= ORDER_MIN,
                           {"residuals": resids, "stationary": stat}))
    # flat-ball isoperimetric instance with closed-form sides
    s0 = 0.05
    ball = geo.sample_chart(
        geo.Hyperplane(3, offset=0.0, polar=True,
                       box=[(s0, 1.0), (0, math.pi), (0, 2 * math.pi)]), (33, 33, 32))
    iso4 = ig.Integrand.isotropic(4)
    chk = va.isoperimetric_check(ball, iso4, 1.0)
    lhs_exact = 4.0 * math.pi / 3.0 * (1.0 - s0**3)
    rhs_exact = SQRT2 / 3.0 * 4.0 * math.pi * (1.0 + s0**2)
    recs.append(_rec_ge("flat ball isoperimetric margin", chk.margin, 0.0))
    recs.append(_rec_le("flat ball |M| vs closed form (rel)",
                        abs(chk.area - lhs_exact) / lhs_exact, 1e-2))
    recs.append(_rec_le("flat ball bound vs closed form (rel)",
                        abs(chk.bound - rhs_exact) / rhs_exact, 1e-2))
    recs.append(Record("flat ball is phi-stationary", float(chk.stationary), 1.0,
                       chk.stationary))
    recs.append(_rec_le("criterion runtime (s)", time.perf_counter() - t0, 60.0))
    return recs


# -- criterion 7: conformal identity chain ----------------------------------------


def criterion_conformal(seed=1234):
    t0 = time.perf_counter()
    recs = []
    lam_table = {2: 0.0, 3: 0.75}
    # three refinement levels; the order is taken on the finest pair (the
    # coarsest pair can sit pre-asymptotically where error terms cross)
    levels = {2: (17, 33, 65), 3: (13, 25, 49)}
    for n in (2, 3):
        for cname, chart in geo.catalog(n).items():
            discs = []
            scale = 1.0
            for res in levels[n]:
                g = geo.sample_chart(chart, res)
                cg = cf.deform(g)
                phi = va.bump_function(g, "centered")
                chk = cf.qform_identity_check(cg, phi, lam_table[n])
                discs.append(chk.discrepancy)
                scale = max(1.0, abs(chk.derived))
            order = np.inf if discs[-1] < 1e-11 else np.log2(discs[-2] / discs[-1])
            ok = order >= ORDER_MIN or discs[-1] / scale <= ORDER_FLOOR_REL
            recs.append(Record(f"qform identity order [{cname} n={n}]", float(order),
                               ORDER_MIN, ok, {"discrepancies": discs}))
    # radial Laplacian identity refinement
    for label, chart, pair in (
            ("plane", geo.Hyperplane(3, offset=1.0), RES_3D),
            ("cone", geo.catalog(3)["cone"], RES_3D),
            ("sphere_origin", geo.catalog(3)["sphere"], RES_3D)):
        resids = [geo.laplace_r_check(geo.sample_chart(chart, r)) for r in pair]
        order = np.inf if resids[1] < 1e-12 else np.log2(resids[0] / resids[1])
        recs.append(Record(f"radial Laplacian identity order [{label}]", float(order),
                           ORDER_MIN, order >= ORDER_MIN, {"residuals": resids}))
    # distance comparison margins
    plane0 = geo.Hyperplane(2, offset=0.0, polar=True, box=[(0.5, 3.0), (0, 2 * math.pi)])
    s = np.linspace(1.0, math.e, 4001)
    ray = np.stack([s, np.zeros_like(s)], axis=-1)
    chk = cf.distance_comparison_check(plane0, ray)
    recs.append(_rec_le("radial ray equality |D - log ratio|",
                        abs(chk.length - chk.log_ratio), 1e-8))
    recs.append(_rec_le("radial ray intrinsic equality",
                        abs(chk.length - chk.intrinsic_log_ratio), 1e-8))
    rng = np.random.default_rng(seed)
    worst = math.inf
    charts = [geo.Sphere(3, radius=1.5, center=[0.2, 0, 0, 0]),
              geo.catalog(3)["cone"], plane0]
    for chart in charts:
        lo = [b[0] for b in chart.box]
        hi = [b[1] for b in chart.box]
        for _ in range(8):
            pts = lo + rng.random((12, chart.n)) * (np.array(hi) - lo)
            dense = []
            for a, b in zip(pts[:-1], pts[1:]):
                tt = np.linspace(0, 1, 80)[:, None]
                dense.append(a + tt * (b - a))
            c = cf.distance_comparison_check(chart, np.concatenate(dense))
            worst = min(worst, c.margin)
            if c.intrinsic_margin is not None:
                worst = min(worst, c.intrinsic_margin)
    recs.append(_rec_ge("random path comparison worst margin", worst, -1e-6))
    # flat patch spectral estimate against the closed-form target 3/4
    g = geo.sample_chart(geo.Hyperplane(3, offset=1.0, box=[(-1.2, 1.2)] * 3), 21)
    est = cf.lambda1_estimate(cf.deform(g), lambda_target=0.75)
    recs.append(_rec_ge("flat patch lambda1 >= 3/4 - 1e-3", est.lambda1, 0.75 - 1e-3))
    # pointwise absorption step margins on the catalog
    beta = co.c0_and_beta()[1]
    worst_cs = math.inf
    for n in (2, 3):
        for chart in geo.catalog(n).values():
            g = geo.sample_chart(chart, 11)
            worst_cs = min(worst_cs, cf.cauchy_schwarz_step_check(g, beta))
    recs.append(_rec_ge("absorption step worst margin", worst_cs, -1e-10))
    # dilation invariance of deformed lengths
    cone = geo.catalog(3)["cone"]
    t = np.linspace(0, 1, 200)
    curve = np.stack([0.5 + t, 0.9 + 0.7 * t, 1.0 + 2.0 * t], axis=-1)
    L1 = cf.curve_gtilde_length(cone, curve)
    curve2 = curve.copy()
    curve2[:, 0] *= 3.7
    L2 = cf.curve_gtilde_length(cone.dilate(3.7), curve2)
    recs.append(_rec_le("dilation invariance of deformed length", abs(L1 - L2), 1e-12))
    recs.append(_rec_le("criterion runtime (s)", time.perf_counter() - t0, 120.0))
    return recs


# -- criterion 8: warped bubble models ---------------------------------------------


def criterion_mubble():
    t0 = time.perf_counter()
    recs = []
    models = mb.catalog()
    for name, model in models.items():
        recs.append(_rec_le(f"{name} witness residual", mb.supersolution_residual(model), 1e-6))
        lam_half, _, _ = mb.lambda1_sturm(model.name, model.params, model.T,
                                          n_grid=model.n_grid // 2 + 1)
        recs.append(_rec_le(f"{name} lambda1 2x-resolution drift",
                            abs(lam_half - model.lambda1), 1e-6))
        recs.append(Record(f"{name} satisfies the distance hypothesis",
                           model.T, 5 * math.pi / math.sqrt(model.lam),
                           model.T >= 5 * math.pi / math.sqrt(model.lam)))
        prof = mb.build_phi_h(model, eps=0.1)
        m_model, _ = mb.check_h_condition(prof, "model")
        m_budget, _ = mb.check_h_condition(prof, "budget")
        recs.append(_rec_ge(f"{name} slope condition margin (model lip)", m_model, -1e-10))
        recs.append(_rec_ge(f"{name} slope condition margin (lip budget)", m_budget, -1e-10))
        sol = mb.minimize_A(model, eps=0.1)
        concl = mb.verify_conclusions(sol)
        recs.append(_rec_ge(f"{name} boundary area margin", concl.area_margin, -1e-8))
        recs.append(_rec_ge(f"{name} diameter margin", concl.diameter_margin, -1e-8))
        recs.append(_rec_ge(f"{name} containment margin", concl.containment_margin, -1e-8))
        recs.append(_rec_ge(f"{name} minimality certificate", concl.minimality_slack, -1e-8))
        recs.append(_rec_le(f"{name} stationarity residual",
                            sol.stationarity_residual, 1e-5))
    # recorded counterexample: half amplitude under the Lipschitz budget
    lam_pinched = co.spectral_lambda(3, 1.0 / SQRT2, co.C0)
    witness = mb.make_model("cylinder", T=20.0, lam=lam_pinched, n_grid=501)
    prof_half = mb.build_phi_h(witness, eps=0.1, amplitude="half")
    m_bad, cfg = mb.check_h_condition(prof_half, "budget")
    recs.append(Record("half-amplitude budget counterexample margin", float(m_bad),
                       0.0, m_bad < 0.0, cfg))
    recs.append(_rec_le("criterion runtime (s)", time.perf_counter() - t0, 60.0))
    return recs


# -- criterion 9: pinching pipeline -------------------------------------------------


def criterion_pinching():
    t0 = time.perf_counter()
    recs = []
    for d in (3, 4):
        for name, integ in ig.catalog(d).items():
            rep = ig.analyze(integ, 17)
            if name == "quadratic_aniso4":
                recs.append(_rec_le("aniso4 a_max equals 4", abs(rep.a_max - 4.0), 1e-9))
                recs.append(Record("aniso4 reported as pinch violation",
                                   float(rep.pinch_satisfied_scaled), 0.0,
                                   not rep.pinch_satisfied_scaled
                                   and not rep.pinch_satisfied))
            else:
                recs.append(Record(
                    f"{name} (d={d}) satisfies the pinch up to scaling",
                    rep.a_max / rep.a_min, SQRT2 + 1e-9, rep.pinch_satisfied_scaled))
                recs.append(_rec_ge(f"{name} (d={d}) Lambda >= 1/sqrt2",
                                    rep.stability_lambda, 1.0 / SQRT2 - 1e-12))
    recs.append(_rec_le("criterion runtime (s)", time.perf_counter() - t0, 30.0))
    return recs


CRITERIA = {
    "constants": criterion_constants,
    "quadratic_lemma": criterion_quadratic_lemma,
    "curvature_ricci": criterion_curvature_ricci,
    "kato": criterion_kato,
    "variation": criterion_variation,
    "vectorfield_isoperimetric": criterion_vectorfield_isoperimetric,
    "conformal": criterion_conformal,
    "mubble": criterion_mubble,
    "pinching": criterion_pinching,
}


def run_all(seed=1234):
    """Run every criterion; returns the aggregate report dictionary.

    The inequality sweeps take the seed; everything else is deterministic
    by construction.
    """
    t0 = time.perf_counter()
    seeded = {"curvature_ricci", "kato", "conformal"}
    report = {"criteria": {}, "pass": True, "seed": int(seed)}
    for name, fn in CRITERIA.items():
        t1 = time.perf_counter()
        recs = fn(seed=seed) if name in seeded else fn()
        ok = all(r.passed for r in recs)
        report["criteria"][name] = {
            "pass": ok,
            "runtime_s": round(time.perf_counter() - t1, 3),
            "records": [r.as_dict() for r in recs],
        }
        report["pass"] = report["pass"] and ok
    report["total_runtime_s"] = round(time.perf_counter() - t0, 3)
    report["runtime_within_budget"] = report["total_runtime_s"] <= 600.0
    report["pass"] = report["pass"] and report["runtime_within_budget"]
    return report
