"""Check orchestration: builds a scenario from a document, samples points,
runs the selected check families, and assembles a deterministic report.

Families: frames, acms, nearly-cosymplectic, gw, qgcr, ascreen, umbilical,
irrotational, mixed, d-geodesic, gauss, spaceform, lemmas.  Module errors
inside a family become failed records with notes; they never abort the other
families.
"""

from __future__ import annotations

import os

import numpy as np

from . import contact, qgcr, theorems
from .errors import NullGeoError
from .geometry import riemann_tensor
from .nullsub import SubmanifoldScenario, sample_points
from .report import CheckReport
from .scenario import build_scenario

FAMILIES = (
    "frames",
    "acms",
    "nearly-cosymplectic",
    "gw",
    "qgcr",
    "ascreen",
    "umbilical",
    "irrotational",
    "mixed",
    "d-geodesic",
    "gauss",
    "spaceform",
    "lemmas",
)

DEFAULT_TOLS = {
    "frames.metric_symmetry": 1e-12,
    "frames.metric_signature": 0.5,
    "frames.tangency": 1e-9,
    "frames.tangent_span": 0.5,
    "frames.rad_gram": 1e-10,
    "frames.pairing_EN": 1e-10,
    "frames.pairing_NN": 1e-10,
    "frames.pairing_NX": 1e-10,
    "frames.sperp_orth": 1e-10,
    "frames.eps_nonzero": 0.5,
    "frames.screen_nondegenerate": 0.5,
    "frames.radical_rank": 0.5,
    "frames.radical_kernel": 1e-8,
    "frames.ltr_span": 1e-8,
    "acms.phi_square": 1e-9,
    "acms.eta_xi": 1e-9,
    "acms.eta_phi": 1e-9,
    "acms.phi_xi": 1e-9,
    "acms.compat": 1e-9,
    "acms.eta_metric": 1e-9,
    "nearly-cosymplectic.residual": 1e-9,
    "nearly-cosymplectic.h_skew": 1e-9,
    "nearly-cosymplectic.h_xi": 1e-9,
    "nearly-cosymplectic.h_eta": 1e-9,
    "nearly-cosymplectic.h_phi_anticommute": 1e-9,
    "nearly-cosymplectic.deta_relation": 1e-9,
    "gw.reconstruction": 1e-8,
    "gw.hl_symmetry": 1e-9,
    "gw.hs_symmetry": 1e-9,
    "gw.tau_consistency": 1e-8,
    "gw.nonmetricity": 1e-8,
    "gw.screen_metric": 1e-8,
    "gw.astar_pairing": 1e-8,
    "gw.parallelism_probe": 1e-8,
    "qgcr.d1_invariant": 1e-8,
    "qgcr.d2_into_screen": 1e-8,
    "qgcr.screen_split": 1e-8,
    "qgcr.d0_invariant": 1e-8,
    "qgcr.image_spans": 1e-8,
    "qgcr.proper_dims": 0.5,
    "ascreen.xi_rad_ltr": 1e-10,
    "ascreen.xi_in_d2_l": 1e-8,
    "ascreen.phi_l_eq_phi_d2": 1e-8,
    "ascreen.xi_reconstruction": 1e-10,
    "umbilical.fit": 1e-8,
    "umbilical.monotone": 0.5,
    "irrotational.h_rad": 1e-8,
    "irrotational.implication": 0.5,
    "irrotational.cbar": 1e-10,
    "mixed.h_on_mixed": 1e-8,
    "mixed.hs_and_astar": 1e-8,
    "mixed.agreement": 0.5,
    "d-geodesic.h_on_d": 1e-8,
    "d-geodesic.ltr_component": 1e-8,
    "d-geodesic.sperp_component": 1e-8,
    "d-geodesic.d0_component": 1e-8,
    "gauss.lhs": 1e-5,
    "gauss.rhs": 1e-5,
    "gauss.residual": 1e-5,
    "spaceform.match": 1e-8,
    "spaceform.sign_relation": 1e-8,
    "lemmas.compose1": 1e-8,
    "lemmas.compose2": 1e-8,
    "lemmas.pairing_skew": 1e-10,
    "lemmas.xi_pairing": 1e-10,
}


class TolTable:
    def __init__(self, overrides: dict[str, float] | None = None, scale: float | None = None):
        self.overrides = dict(overrides or {})
        if scale is None:
            scale = float(os.environ.get("NULLGEO_TOL_SCALE", "1") or 1)
        self.scale = scale

    def get(self, check_id: str) -> float:
        if check_id in self.overrides:
            base = self.overrides[check_id]
        else:
            family = check_id.split(".", 1)[0]
            base = self.overrides.get(family, DEFAULT_TOLS[check_id])
        return base * self.scale


def run_checks(
    doc: dict,
    selectors=None,
    samples: int | None = None,
    seed: int | None = None,
    tol_overrides: dict[str, float] | None = None,
    param_overrides: dict[str, float] | None = None,
    gauss_tuples: int = 20,
    gauss_points: int = 1,
    spaceform_tuples: int = 40,
    spaceform_points: int = 2,
) -> CheckReport:
    if selectors:
        unknown = set(selectors) - set(FAMILIES)
        if unknown:
            raise NullGeoError(f"unknown check families: {sorted(unknown)}")
        active = [f for f in FAMILIES if f in set(selectors)]
    else:
        active = list(FAMILIES)

    sc = build_scenario(doc, param_overrides)
    overrides = dict(sc.tolerances)
    overrides.update(tol_overrides or {})
    tols = TolTable(overrides)
    pts = sample_points(sc, samples, seed)
    rep = CheckReport(
        scenario=sc.name,
        seed=sc.seed if seed is None else seed,
        samples=len(pts),
        params={k: float(v) for k, v in (sc.bindings or {}).items()},
    )
    rep.derived["discrepancy_flags"] = []
    state = _State(sc=sc, pts=pts, tols=tols)

    runners = {
        "frames": _run_frames,
        "acms": _run_acms,
        "nearly-cosymplectic": _run_nearly_cosymplectic,
        "gw": _run_gw,
        "qgcr": _run_qgcr,
        "ascreen": _run_ascreen,
        "umbilical": _run_umbilical,
        "irrotational": _run_irrotational,
        "mixed": _run_mixed,
        "d-geodesic": _run_d_geodesic,
        "gauss": lambda st, rp: _run_gauss(st, rp, gauss_tuples, gauss_points),
        "spaceform": lambda st, rp: _run_spaceform(st, rp, spaceform_tuples, spaceform_points),
        "lemmas": _run_lemmas,
    }
    for family in active:
        try:
            runners[family](state, rep)
        except NullGeoError as exc:
            rep.add_error(f"{family}.error", None, str(exc))
    rep.sort()
    return rep


class _State:
    def __init__(self, sc: SubmanifoldScenario, pts, tols: TolTable):
        self.sc = sc
        self.pts = pts
        self.tols = tols
        self._qgcr_verdicts = None
        self._ascreen = None
        self._umbilical = None
        self._irrotational = None
        self._cbar = None
        self._nc = None

    def nc_residuals(self) -> list[float]:
        """Worst nearly-cosymplectic residual per point, over the frame."""
        if self._nc is None:
            sc = self.sc
            fields = sc.all_fields()
            out = []
            for sp in self.pts:
                pd = sc.contact_point(sp.ambient)
                jets = [contact.vecjet(f, sp.ambient) for f in fields]
                worst = 0.0
                for a in range(len(jets)):
                    for b in range(a, len(jets)):
                        res = np.max(
                            np.abs(
                                contact.nabla_phi_values(pd, jets[a].vals, jets[b])
                                + contact.nabla_phi_values(pd, jets[b].vals, jets[a])
                            )
                        )
                        worst = max(worst, float(res))
                out.append(worst)
            self._nc = out
        return self._nc

    # cached cross-family prerequisites ------------------------------------

    def qgcr_verdicts(self):
        if self._qgcr_verdicts is None:
            self._qgcr_verdicts = [qgcr.verify_qgcr(self.sc, sp) for sp in self.pts]
        return self._qgcr_verdicts

    def ascreen_checks(self):
        if self._ascreen is None:
            self._ascreen = [qgcr.verify_ascreen(self.sc, sp) for sp in self.pts]
        return self._ascreen

    def ascreen_ok(self) -> bool:
        tol = self.tols.get("ascreen.xi_rad_ltr")
        return all(
            a.xi_rad_ltr < tol and a.xi_in_d2_l < self.tols.get("ascreen.xi_in_d2_l")
            for a in self.ascreen_checks()
        )

    def umbilical(self):
        if self._umbilical is None:
            self._umbilical = theorems.umbilical_check(
                self.sc, self.pts, tol=self.tols.get("umbilical.fit")
            )
        return self._umbilical

    def irrotational(self):
        if self._irrotational is None:
            self._irrotational = theorems.irrotational_check(
                self.sc, self.pts, tol=self.tols.get("irrotational.h_rad")
            )
        return self._irrotational

    def cbar(self):
        if self._cbar is None and self.sc.structure is not None and self.sc.qgcr:
            if self.irrotational().irrotational and self.ascreen_ok():
                worst = None
                for sp in self.pts:
                    est = theorems.cbar_from_irrotational(self.sc, sp)
                    if worst is None or abs(est.value) > abs(worst.value):
                        worst = est
                self._cbar = worst
        return self._cbar


def _structure_skip(state: _State, rep: CheckReport, family: str) -> bool:
    if state.sc.structure is None:
        rep.add_skip(f"{family}.structure", None, "scenario declares no almost contact structure")
        return True
    return False


def _qgcr_skip(state: _State, rep: CheckReport, family: str) -> bool:
    if _structure_skip(state, rep, family):
        return True
    if state.sc.qgcr is None:
        rep.add_skip(f"{family}.declaration", None, "scenario declares no QGCR decomposition")
        return True
    return False


def _run_frames(state: _State, rep: CheckReport) -> None:
    from .nullsub import construct_ltr, mutual_span_residual, radical_rank, span_residual

    sc, tols = state.sc, state.tols
    for sp in state.pts:
        idx = sp.index
        rep.add("frames.metric_symmetry", idx, sc.metric.symmetry_residual(sp.ambient), tols.get("frames.metric_symmetry"))
        sig = sc.metric.signature_at(sp.ambient)
        rep.add(
            "frames.metric_signature", idx,
            0.0 if sig == tuple(sc.metric.signature) else 1.0,
            tols.get("frames.metric_signature"),
            note=f"eigenvalue signs {sig}, declared {tuple(sc.metric.signature)}",
        )
        fp = sc.frame_point(sp)
        worst_tan = 0.0
        for f in sc.tangent_fields():
            _, res = fp.tangent_param_dir(f.value(sp.ambient))
            worst_tan = max(worst_tan, res)
        rep.add("frames.tangency", idx, worst_tan, tols.get("frames.tangency"))
        if sc.m:
            tsv = np.linalg.svd(fp.T, compute_uv=False)
            independent = tsv[-1] > 0.0 and tsv[0] / tsv[-1] < 1e10
            rep.add(
                "frames.tangent_span", idx, 0.0 if independent else 1.0,
                tols.get("frames.tangent_span"),
                note=f"tangent-frame singular values [{tsv[-1]:.3e}, {tsv[0]:.3e}]",
            )

        r = sc.r
        if r:
            rep.add("frames.rad_gram", idx, float(np.max(np.abs(fp.E @ fp.G @ fp.E.T))), tols.get("frames.rad_gram"))
            rep.add("frames.pairing_EN", idx, float(np.max(np.abs(fp.E @ fp.G @ fp.N.T - np.eye(r)))), tols.get("frames.pairing_EN"))
            rep.add("frames.pairing_NN", idx, float(np.max(np.abs(fp.N @ fp.G @ fp.N.T))), tols.get("frames.pairing_NN"))
            if fp.X.shape[0]:
                rep.add("frames.pairing_NX", idx, float(np.max(np.abs(fp.N @ fp.G @ fp.X.T))), tols.get("frames.pairing_NX"))
        if fp.W.shape[0]:
            orth = float(np.max(np.abs(fp.W @ fp.G @ np.vstack([fp.T, fp.N]).T))) if (sc.m or r) else 0.0
            rep.add("frames.sperp_orth", idx, orth, tols.get("frames.sperp_orth"))
            rep.add(
                "frames.eps_nonzero", idx,
                0.0 if float(np.min(np.abs(fp.eps))) > 1e-6 else 1.0,
                tols.get("frames.eps_nonzero"),
                note=f"eps = {fp.eps.tolist()}",
            )
        if fp.X.shape[0]:
            Gs = fp.X @ fp.G @ fp.X.T
            ev = np.abs(np.linalg.eigvalsh(0.5 * (Gs + Gs.T)))
            ok = ev.min() > sc.rank_tol * max(ev.max(), 1.0)
            rep.add(
                "frames.screen_nondegenerate", idx, 0.0 if ok else 1.0,
                tols.get("frames.screen_nondegenerate"),
                note=f"screen Gram |eig| range [{ev.min():.3e}, {ev.max():.3e}]",
            )
        try:
            rr = radical_rank(sc, sp)
            rep.add(
                "frames.radical_rank", idx, float(abs(rr.r - r)), tols.get("frames.radical_rank"),
                note=f"detected rank {rr.r}, declared {r}",
            )
            if rr.r == r and r:
                decl = np.eye(sc.m)[:r]
                rep.add(
                    "frames.radical_kernel", idx,
                    mutual_span_residual(rr.kernel, decl),
                    tols.get("frames.radical_kernel"),
                )
        except NullGeoError as exc:
            rep.add_error("frames.radical_rank", idx, str(exc))
        if r:
            try:
                cand = construct_ltr(sc, sp)
                rep.add("frames.ltr_span", idx, mutual_span_residual(cand, fp.N), tols.get("frames.ltr_span"))
            except NullGeoError as exc:
                rep.add_error("frames.ltr_span", idx, str(exc))


def _run_acms(state: _State, rep: CheckReport) -> None:
    if _structure_skip(state, rep, "acms"):
        return
    sc = state.sc
    for sp in state.pts:
        for name, res in contact.acms_axiom_residuals(sc.structure, sc.metric, sp.ambient).items():
            rep.add(f"acms.{name}", sp.index, res, state.tols.get(f"acms.{name}"))


def _run_nearly_cosymplectic(state: _State, rep: CheckReport) -> None:
    if _structure_skip(state, rep, "nearly-cosymplectic"):
        return
    sc = state.sc
    fields = sc.all_fields()
    nc = state.nc_residuals()
    for pos, sp in enumerate(state.pts):
        idx = sp.index
        pd = sc.contact_point(sp.ambient)
        jets = [contact.vecjet(f, sp.ambient) for f in fields]
        rep.add("nearly-cosymplectic.residual", idx, nc[pos], state.tols.get("nearly-cosymplectic.residual"))
        for name, res in contact.h_property_residuals(pd).items():
            rep.add(f"nearly-cosymplectic.{name}", idx, res, state.tols.get(f"nearly-cosymplectic.{name}"))
        deta = max(
            contact.d_eta_relation_residual(pd, jets[a], jets[b])
            for a in range(len(jets))
            for b in range(len(jets))
        )
        rep.add("nearly-cosymplectic.deta_relation", idx, deta, state.tols.get("nearly-cosymplectic.deta_relation"))


def _run_gw(state: _State, rep: CheckReport) -> None:
    sc = state.sc
    for sp in state.pts:
        idx = sp.index
        tab = sc.gw_table(sp)
        rep.add("gw.reconstruction", idx, tab.reconstruction_residual(), state.tols.get("gw.reconstruction"))
        hl_sym, hs_sym = tab.h_symmetry_residuals()
        rep.add("gw.hl_symmetry", idx, hl_sym, state.tols.get("gw.hl_symmetry"))
        rep.add("gw.hs_symmetry", idx, hs_sym, state.tols.get("gw.hs_symmetry"))
        rep.add("gw.tau_consistency", idx, tab.tau_consistency_residual(), state.tols.get("gw.tau_consistency"))
        rep.add("gw.nonmetricity", idx, tab.nonmetricity_residual(), state.tols.get("gw.nonmetricity"))
        rep.add("gw.screen_metric", idx, tab.screen_metric_residual(), state.tols.get("gw.screen_metric"))
        rep.add("gw.astar_pairing", idx, tab.astar_pairing_residual(), state.tols.get("gw.astar_pairing"))
        for probe in sc.probes:
            res = theorems.run_parallelism_probe(sc, sp, probe)
            rep.add(
                "gw.parallelism_probe", idx,
                max(res.membership_residual, res.computed_match_residual),
                state.tols.get("gw.parallelism_probe"),
                note=f"screen[{res.screen_index}] coefficient {res.computed_coefficient!r}",
            )
            if res.discrepancy and res.discrepancy not in rep.derived["discrepancy_flags"]:
                rep.derived["discrepancy_flags"].append(res.discrepancy)


def _run_qgcr(state: _State, rep: CheckReport) -> None:
    if _qgcr_skip(state, rep, "qgcr"):
        return
    verdicts = state.qgcr_verdicts()
    tol = state.tols
    for sp, v in zip(state.pts, verdicts):
        idx = sp.index
        rep.add("qgcr.d1_invariant", idx, v.d1_invariant, tol.get("qgcr.d1_invariant"))
        rep.add("qgcr.d2_into_screen", idx, v.d2_into_screen, tol.get("qgcr.d2_into_screen"))
        rep.add("qgcr.screen_split", idx, v.screen_split, tol.get("qgcr.screen_split"))
        rep.add("qgcr.d0_invariant", idx, v.d0_invariant, tol.get("qgcr.d0_invariant"))
        rep.add("qgcr.image_spans", idx, v.image_spans, tol.get("qgcr.image_spans"))
        rep.add(
            "qgcr.proper_dims", idx,
            0.0 if (not v.proper or v.dim_bounds_ok) else 1.0,
            tol.get("qgcr.proper_dims"),
            note="; ".join(v.notes) if v.notes else f"dims {v.dims}",
        )
    qtol = tol.get("qgcr.d1_invariant")
    rep.verdicts["qgcr"] = all(v.passes(qtol) for v in verdicts)
    rep.verdicts["proper"] = all(v.proper and v.dim_bounds_ok for v in verdicts)
    rep.derived["dims"] = list(verdicts[0].dims)
    # informational: a QGCR submanifold tangent to xi is of GCR type
    from .nullsub import span_residual

    sp0 = state.pts[0]
    fp = state.sc.frame_point(sp0)
    pd = state.sc.contact_point(sp0.ambient)
    if span_residual(pd.xi.vals[None, :], fp.T) < tol.get("qgcr.d1_invariant"):
        note = "xi is tangent to the submanifold: the scenario is of GCR type"
        rep.derived.setdefault("notes", []).append(note)


def _run_ascreen(state: _State, rep: CheckReport) -> None:
    if _qgcr_skip(state, rep, "ascreen"):
        return
    tol = state.tols
    ok = True
    for sp, a in zip(state.pts, state.ascreen_checks()):
        idx = sp.index
        r1 = rep.add("ascreen.xi_rad_ltr", idx, a.xi_rad_ltr, tol.get("ascreen.xi_rad_ltr"))
        r2 = rep.add("ascreen.xi_in_d2_l", idx, a.xi_in_d2_l, tol.get("ascreen.xi_in_d2_l"))
        rep.add("ascreen.xi_reconstruction", idx, a.reconstruction, tol.get("ascreen.xi_reconstruction"))
        ok = ok and r1.verdict == "pass" and r2.verdict == "pass"
        if a.phi_l_eq_phi_d2 is not None:
            r3 = rep.add("ascreen.phi_l_eq_phi_d2", idx, a.phi_l_eq_phi_d2, tol.get("ascreen.phi_l_eq_phi_d2"))
            ok = ok and r3.verdict == "pass"
    rep.verdicts["ascreen"] = ok


def _run_umbilical(state: _State, rep: CheckReport) -> None:
    try:
        verdict = state.umbilical()
    except NullGeoError as exc:
        rep.add_error("umbilical.fit", None, str(exc))
        rep.verdicts["umbilical"] = None
        rep.verdicts["geodesic"] = None
        return
    tol = state.tols
    strict = max(f.strict_residual for f in verdict.fits)
    rep.add(
        "umbilical.fit", None, verdict.fit_residual, tol.get("umbilical.fit"),
        note=f"strict residual over all pairs {strict:.3e}",
    )
    rep.add(
        "umbilical.monotone", None,
        0.0 if (not verdict.totally_geodesic or verdict.totally_umbilical) else 1.0,
        tol.get("umbilical.monotone"),
        note="totally geodesic must imply totally umbilical",
    )
    rep.verdicts["umbilical"] = verdict.totally_umbilical
    rep.verdicts["geodesic"] = verdict.totally_geodesic
    rep.derived["H_fit"] = {
        "hl_fit_point0": [float(x) for x in verdict.fits[0].hl_fit],
        "hs_fit_point0": [float(x) for x in verdict.fits[0].hs_fit],
        "fit_residual": verdict.fit_residual,
        "strict_residual": strict,
        "geodesic_residual": verdict.geodesic_residual,
    }


def _run_irrotational(state: _State, rep: CheckReport) -> None:
    verdict = state.irrotational()
    tol = state.tols
    rep.add("irrotational.h_rad", None, verdict.residual, tol.get("irrotational.h_rad"))
    rep.verdicts["irrotational"] = verdict.irrotational
    try:
        geod = state.umbilical().totally_geodesic
    except NullGeoError:
        geod = False  # undetermined fit: no implication to assert
    rep.add(
        "irrotational.implication", None,
        0.0 if (not geod or verdict.irrotational) else 1.0,
        tol.get("irrotational.implication"),
        note="totally geodesic must imply irrotational",
    )
    if state.sc.structure is None or state.sc.qgcr is None:
        rep.add_skip("irrotational.cbar", None, "needs a structure and a QGCR declaration")
        return
    if not verdict.irrotational or not state.ascreen_ok():
        rep.add_skip("irrotational.cbar", None, "scenario is not an irrotational ascreen submanifold")
        return
    est = state.cbar()
    if est.contradiction:
        rep.add_error("irrotational.cbar", None, est.contradiction)
        return
    rep.add(
        "irrotational.cbar", None, 0.0, state.tols.get("irrotational.cbar"),
        note=f"cbar = {est.value!r} ({est.sign_class})",
    )
    rep.derived["cbar"] = {"value": est.value, "source": est.source, "sign_class": est.sign_class}


def _run_mixed(state: _State, rep: CheckReport) -> None:
    if _qgcr_skip(state, rep, "mixed"):
        return
    v = theorems.mixed_geodesic_check(state.sc, state.pts, tol=state.tols.get("mixed.h_on_mixed"))
    rep.add("mixed.h_on_mixed", None, v.residual_a, state.tols.get("mixed.h_on_mixed"))
    rep.add("mixed.hs_and_astar", None, v.residual_b, state.tols.get("mixed.hs_and_astar"))
    rep.add(
        "mixed.agreement", None, 0.0 if v.agreement else 1.0, state.tols.get("mixed.agreement"),
        note="the two characterisations of mixed geodesy must agree"
        + (" (vacuous: empty Dhat)" if v.vacuous else ""),
    )
    rep.verdicts["mixed_geodesic"] = v.verdict_a


def _run_d_geodesic(state: _State, rep: CheckReport) -> None:
    if _qgcr_skip(state, rep, "d-geodesic"):
        return
    v = theorems.d_geodesic_check(state.sc, state.pts, tol=state.tols.get("d-geodesic.h_on_d"))
    note = "; ".join(v.notes)
    rep.add("d-geodesic.h_on_d", None, v.residual, state.tols.get("d-geodesic.h_on_d"), note=note)
    rep.add("d-geodesic.ltr_component", None, v.ltr_component, state.tols.get("d-geodesic.ltr_component"))
    rep.add("d-geodesic.sperp_component", None, v.sperp_component, state.tols.get("d-geodesic.sperp_component"))
    rep.add("d-geodesic.d0_component", None, v.d0_component, state.tols.get("d-geodesic.d0_component"))
    rep.verdicts["d_geodesic"] = v.verdict


def _run_gauss(state: _State, rep: CheckReport, tuples: int, points: int) -> None:
    sc = state.sc
    rng = np.random.default_rng(state.pts[0].index + 1000 + sc.seed)
    m = sc.m
    if m == 0:
        rep.add_skip("gauss.residual", None, "no tangent frame")
        return
    note = (
        "flat-ambient check; a global sign flip of the curvature convention "
        "would leave it unchanged (both sides vanish)"
    )
    for sp in state.pts[:points]:
        probe = theorems.GaussEquationProbe(sc, sp)
        worst_l = worst_r = worst = 0.0
        for _ in range(tuples):
            ax, aw, az, ay = (int(rng.integers(0, m)) for _ in range(4))
            lhs, rhs = probe.sides(ax, aw, az, ay)
            worst_l = max(worst_l, abs(lhs))
            worst_r = max(worst_r, abs(rhs))
            worst = max(worst, abs(lhs - rhs))
        rep.add("gauss.lhs", sp.index, worst_l, state.tols.get("gauss.lhs"))
        rep.add("gauss.rhs", sp.index, worst_r, state.tols.get("gauss.rhs"))
        rep.add("gauss.residual", sp.index, worst, state.tols.get("gauss.residual"), note=note)


def _run_spaceform(state: _State, rep: CheckReport, tuples: int, points: int) -> None:
    if _structure_skip(state, rep, "spaceform"):
        return
    sc = state.sc
    est = state.cbar()
    if est is None or est.contradiction:
        rep.add_skip(
            "spaceform.match", None,
            "no phi-sectional curvature estimate (needs an irrotational ascreen scenario)",
        )
        return
    rng = np.random.default_rng(2000 + sc.seed)
    nf = sc.n
    for sp in state.pts[:points]:
        tab = theorems.SpaceformTable(sc, sp)
        R4 = riemann_tensor(sc.metric, sp.ambient)
        F = tab.fp.FF
        worst = 0.0
        for _ in range(tuples):
            x, w, z, y = (int(rng.integers(0, nf)) for _ in range(4))
            sf = tab.value(x, w, z, y, est.value)
            rm = float(np.einsum("ijkl,i,j,k,l->", R4, F[x], F[w], F[z], F[y]))
            worst = max(worst, abs(sf - rm))
        rep.add("spaceform.match", sp.index, worst, state.tols.get("spaceform.match"))
    # sign relation for umbilical/geodesic scenarios: cbar |X|^2 |Z|^2 equals
    # |(nab_Z phi)X|^2 + gbar(Z, H X)^2 for X in D0 and Z in phi(S)
    if sc.qgcr is None:
        rep.add_skip("spaceform.sign_relation", None, "scenario declares no QGCR decomposition")
        return
    try:
        umb = state.umbilical()
        umbilical_ok = umb.totally_umbilical or umb.totally_geodesic
    except NullGeoError as exc:
        rep.add_skip("spaceform.sign_relation", None, str(exc))
        return
    tol = state.tols.get("spaceform.sign_relation")
    for sp in state.pts[:points]:
        worst = None
        skip_note = None
        for x_s in sc.qgcr.d0:
            for z_s in sc.qgcr.phi_s:
                rec = theorems.curvature_sign_relation(
                    sc, sp, est.value, x_s, z_s, tol=tol, umbilical_ok=umbilical_ok
                )
                if rec.skipped:
                    skip_note = rec.skipped
                    continue
                if not rec.rhs_nonnegative:
                    rep.add_error(
                        "spaceform.sign_relation", sp.index,
                        f"right side negative ({rec.rhs!r})",
                    )
                worst = max(worst or 0.0, rec.residual)
        if worst is None:
            rep.add_skip("spaceform.sign_relation", sp.index, skip_note or "no admissible (X, Z) pair")
        else:
            rep.add("spaceform.sign_relation", sp.index, worst, tol)


def _run_lemmas(state: _State, rep: CheckReport) -> None:
    if _structure_skip(state, rep, "lemmas"):
        return
    sc = state.sc
    fields = sc.all_fields()
    nc = state.nc_residuals()
    nc_tol = state.tols.get("nearly-cosymplectic.residual")
    for pos, sp in enumerate(state.pts):
        idx = sp.index
        pd = sc.contact_point(sp.ambient)
        jets = [contact.vecjet(f, sp.ambient) for f in fields]
        if nc[pos] >= nc_tol:
            # the composition identities presuppose the nearly cosymplectic
            # condition: a violation is reported there, not double-counted
            rep.add_skip(
                "lemmas.compose1", idx,
                f"structure is not nearly cosymplectic (residual {nc[pos]:.3e})",
            )
            rep.add_skip(
                "lemmas.compose2", idx,
                f"structure is not nearly cosymplectic (residual {nc[pos]:.3e})",
            )
        else:
            w1 = w2 = 0.0
            for X in jets:
                for Y in jets:
                    r1, r2 = contact.phi_derivative_compose_residuals(pd, X, Y)
                    w1 = max(w1, float(np.max(np.abs(r1))))
                    w2 = max(w2, float(np.max(np.abs(r2))))
            rep.add("lemmas.compose1", idx, w1, state.tols.get("lemmas.compose1"))
            rep.add("lemmas.compose2", idx, w2, state.tols.get("lemmas.compose2"))
        if sc.qgcr is not None:
            rep.add(
                "lemmas.pairing_skew", idx,
                theorems.skew_pairing_check(sc, sp),
                state.tols.get("lemmas.pairing_skew"),
            )
            res = qgcr.xi_pairing_check(sc, sp)
            if res.skipped:
                rep.add_skip("lemmas.xi_pairing", idx, res.skipped)
            else:
                rep.add(
                    "lemmas.xi_pairing", idx, res.residual,
                    state.tols.get("lemmas.xi_pairing"),
                    note=f"2 eta(E) eta(N) = {res.value!r}",
                )
