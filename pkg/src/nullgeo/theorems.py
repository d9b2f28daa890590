"""Geodesy and umbilicity predicates, the curvature relation between ambient
and induced connections, the space-form curvature expression, and the
checkable conditions of the classification theorems.

Derivatives of extracted coefficients (the nabla-h terms of the curvature
relation) are the only non-pointwise quantities; they use Richardson-
extrapolated central differences along parameter directions of the
submanifold, with automatic step halving at domain boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contact import ContactPointData, phi_apply_jet, nabla_phi_values, vecjet
from .errors import EvalDomainError, NullGeoError
from .geometry import VectorField, riemann_tensor
from .nullsub import (
    GaussWeingartenTable,
    SamplePoint,
    SubmanifoldScenario,
    point_from_params,
)

FD_STEP = 1e-4


# --- umbilicity -------------------------------------------------------------


@dataclass
class UmbilicalFit:
    """Proportionality fit h = g (x) H at one point.

    The fitted coefficients come from the pairs where each form is supported;
    degenerate pairs (g = 0) must carry vanishing h.  ``strict_residual`` is
    the worst |h - H g| over ALL tangent pairs, reported for transparency: a
    scenario can satisfy the support-restricted fit while a pair with h = 0
    but g != 0 keeps the strict residual large.
    """

    hl_fit: np.ndarray      # fitted scalars, one per ltr direction
    hs_fit: np.ndarray      # fitted scalars, one per screen-transversal direction
    h_field: np.ndarray     # fitted transversal curvature field, ambient components
    fit_residual: float
    strict_residual: float
    geodesic_residual: float  # max |h| over all pairs


def _fit_scalar(h: np.ndarray, g: np.ndarray, support_tol: float):
    """Least-squares c for h ~ c g over the support of h, plus residuals."""
    gscale = float(np.max(np.abs(g), initial=0.0))
    degenerate = np.abs(g) <= 1e-9 * max(gscale, 1.0)
    support = np.abs(h) > support_tol
    fit_pairs = support & ~degenerate
    denom = float(np.sum(g[fit_pairs] ** 2))
    c = float(np.sum(h[fit_pairs] * g[fit_pairs]) / denom) if denom > 0 else 0.0
    resid = 0.0
    if np.any(fit_pairs):
        resid = float(np.max(np.abs(h[fit_pairs] - c * g[fit_pairs])))
    if np.any(degenerate):
        resid = max(resid, float(np.max(np.abs(h[degenerate]))))
    strict = float(np.max(np.abs(h - c * g), initial=0.0))
    return c, resid, strict


def umbilical_fit(tab: GaussWeingartenTable, support_tol: float = 1e-8) -> UmbilicalFit:
    sc = tab.sc
    fp = tab.fp
    g = tab.Gt
    if float(np.max(np.abs(g), initial=0.0)) == 0.0:
        raise NullGeoError("umbilical fit undetermined: all tangent pairs are g-null")
    hl_fit = np.zeros(sc.r)
    hs_fit = np.zeros(tab.HS.shape[2])
    fit_res = strict = geo = 0.0
    for i in range(sc.r):
        c, r1, r2 = _fit_scalar(tab.HL[:, :, i], g, support_tol)
        hl_fit[i] = c
        fit_res, strict = max(fit_res, r1), max(strict, r2)
        geo = max(geo, float(np.max(np.abs(tab.HL[:, :, i]), initial=0.0)))
    for al in range(tab.HS.shape[2]):
        c, r1, r2 = _fit_scalar(tab.HS[:, :, al], g, support_tol)
        hs_fit[al] = c
        fit_res, strict = max(fit_res, r1), max(strict, r2)
        geo = max(geo, float(np.max(np.abs(tab.HS[:, :, al]), initial=0.0)))
    h_field = np.zeros(sc.n)
    if sc.r:
        h_field += hl_fit @ fp.N
    if fp.W.shape[0]:
        h_field += hs_fit @ fp.W
    return UmbilicalFit(
        hl_fit=hl_fit,
        hs_fit=hs_fit,
        h_field=h_field,
        fit_residual=fit_res,
        strict_residual=strict,
        geodesic_residual=geo,
    )


@dataclass
class UmbilicalVerdict:
    fits: list[UmbilicalFit]
    fit_residual: float
    geodesic_residual: float
    totally_umbilical: bool
    totally_geodesic: bool


def umbilical_check(sc: SubmanifoldScenario, pts, tol: float = 1e-8, tables=None) -> UmbilicalVerdict:
    tables = tables or [sc.gw_table(sp) for sp in pts]
    fits = [umbilical_fit(tab, support_tol=tol) for tab in tables]
    fr = max(f.fit_residual for f in fits)
    gr = max(f.geodesic_residual for f in fits)
    return UmbilicalVerdict(
        fits=fits,
        fit_residual=fr,
        geodesic_residual=gr,
        totally_umbilical=fr < tol,
        totally_geodesic=gr < tol,
    )


# --- irrotationality --------------------------------------------------------


@dataclass
class IrrotationalVerdict:
    residual: float
    irrotational: bool


def irrotational_check(sc: SubmanifoldScenario, pts, tol: float = 1e-8, tables=None) -> IrrotationalVerdict:
    """h^l(X, E) = h^s(X, E) = 0 for every tangent X and radical E."""
    tables = tables or [sc.gw_table(sp) for sp in pts]
    worst = 0.0
    for tab in tables:
        r = sc.r
        if r == 0:
            continue
        worst = max(worst, float(np.max(np.abs(tab.HL[:, :r, :]), initial=0.0)))
        worst = max(worst, float(np.max(np.abs(tab.HS[:, :r, :]), initial=0.0)))
    return IrrotationalVerdict(residual=worst, irrotational=worst < tol)


# --- mixed / D-geodesy ------------------------------------------------------


def _d_indices(sc: SubmanifoldScenario) -> list[int]:
    q = sc.qgcr
    return list(q.d1) + [sc.r + j for j in q.d0]


def _dhat_indices(sc: SubmanifoldScenario) -> list[int]:
    q = sc.qgcr
    out: list[int] = []
    for i in q.d2:
        out.append(i)
    for j in list(q.phi_d2) + list(q.phi_s) + list(q.phi_l):
        idx = sc.r + j
        if idx not in out:
            out.append(idx)
    return out


@dataclass
class MixedGeodesicVerdict:
    residual_a: float
    residual_b: float
    verdict_a: bool
    verdict_b: bool
    agreement: bool
    vacuous: bool


def mixed_geodesic_check(sc: SubmanifoldScenario, pts, tol: float = 1e-8, tables=None) -> MixedGeodesicVerdict:
    """verdict_a: h vanishes on D x Dhat.  verdict_b: the screen fundamental
    forms vanish on D x Dhat and A*_{E_i} annihilates D.  The classification
    theorem asserts their equivalence for 3-null proper ascreen scenarios;
    ``agreement`` records it."""
    tables = tables or [sc.gw_table(sp) for sp in pts]
    d_idx = _d_indices(sc)
    dh_idx = _dhat_indices(sc)
    if not dh_idx:
        return MixedGeodesicVerdict(0.0, 0.0, True, True, True, vacuous=True)
    ra = rb = 0.0
    for tab in tables:
        for a in d_idx:
            for b in dh_idx:
                ra = max(ra, float(np.max(np.abs(tab.second_fundamental(a, b)))))
                if tab.HS.shape[2]:
                    rb = max(rb, float(np.max(np.abs(tab.HS[a, b, :]))))
            if sc.r:
                rb = max(rb, float(np.max(np.abs(tab.A_star[a]))))
    va, vb = ra < tol, rb < tol
    return MixedGeodesicVerdict(ra, rb, va, vb, va == vb, vacuous=False)


@dataclass
class DGeodesicVerdict:
    residual: float
    verdict: bool
    ltr_component: float      # ltr part of phi h^l(X, phi E), X in D, E in Rad
    sperp_component: float    # S(TM-perp) part of phi h^s(X, phi W), W in S
    d0_component: float       # D0 part of nab_X phi E and nab_X phi W
    notes: list[str] = field(default_factory=list)


def d_geodesic_check(sc: SubmanifoldScenario, pts, tol: float = 1e-8, tables=None) -> DGeodesicVerdict:
    """h = 0 on D x D, plus the component conditions of the classification
    theorem (reported, not folded into the verdict)."""
    tables = tables or [sc.gw_table(sp) for sp in pts]
    d_idx = _d_indices(sc)
    q = sc.qgcr
    worst = 0.0
    ltr_comp = sperp_comp = d0_comp = 0.0
    notes: list[str] = []
    for tab in tables:
        fp = tab.fp
        pd = sc.contact_point(tab.sp.ambient)
        m, r = sc.m, sc.r
        for a in d_idx:
            for b in d_idx:
                worst = max(worst, float(np.max(np.abs(tab.second_fundamental(a, b)))))
        # component conditions
        for a in d_idx:
            for i in range(r):
                phiE = pd.phi_of(fp.E[i])
                try:
                    ec = fp.tangent_coeffs(phiE)
                except NullGeoError:
                    notes.append(f"phi(E_{i + 1}) is not tangent; component conditions skipped")
                    continue
                hl_vec = np.einsum("bi,b->i", tab.HL[a], ec)
                hvec = hl_vec @ fp.N if r else np.zeros(sc.n)
                coeffs = fp.decompose(pd.phi_of(hvec))
                ltr_comp = max(ltr_comp, float(np.max(np.abs(coeffs[m : m + r]), initial=0.0)))
                nab_phiE = fp.tangential(fp.decompose(_cov_of_vec(tab, pd, a, vecjet_of_phi(pd, fp, ("rad", i)))))
                d0_comp = max(d0_comp, _component_norm(fp, nab_phiE, [r + j for j in q.d0]))
            for s_i in q.s_s:
                phiW = pd.phi_of(fp.W[s_i])
                try:
                    wc = fp.tangent_coeffs(phiW)
                except NullGeoError:
                    notes.append(f"phi(W_{s_i + 1}) is not tangent; component conditions skipped")
                    continue
                hs_vec = np.einsum("bi,b->i", tab.HS[a], wc)
                hvec = hs_vec @ fp.W if fp.W.shape[0] else np.zeros(sc.n)
                coeffs = fp.decompose(pd.phi_of(hvec))
                sperp_comp = max(sperp_comp, float(np.max(np.abs(coeffs[m + r :]), initial=0.0)))
                nab_phiW = fp.tangential(fp.decompose(_cov_of_vec(tab, pd, a, vecjet_of_phi(pd, fp, ("stransversal", s_i)))))
                d0_comp = max(d0_comp, _component_norm(fp, nab_phiW, [r + j for j in q.d0]))
    return DGeodesicVerdict(
        residual=worst,
        verdict=worst < tol,
        ltr_component=ltr_comp,
        sperp_component=sperp_comp,
        d0_component=d0_comp,
        notes=sorted(set(notes)),
    )


def vecjet_of_phi(pd: ContactPointData, fp, which: tuple[str, int]):
    """VecJet of phi applied to a declared frame field."""
    role, i = which
    sc = fp.sc
    fields = {"rad": sc.rad, "screen": sc.screen, "ltr": sc.ltr, "stransversal": sc.stransversal}
    return phi_apply_jet(pd, vecjet(fields[role][i], fp.sp.ambient))


def _cov_of_vec(tab: GaussWeingartenTable, pd: ContactPointData, a: int, V) -> np.ndarray:
    """Ambient nab_{T_a} V for an evaluated field jet V."""
    xv = tab.fp.T[a]
    return V.jac @ xv + np.einsum("kuv,u,v->k", tab.Gamma, xv, V.vals)


def _component_norm(fp, v: np.ndarray, idx: list[int]) -> float:
    """Euclidean norm of the component of a tangent vector along the tangent
    sub-frame with the given indices."""
    if not idx:
        return 0.0
    c = fp.tangent_coeffs(v, tol=np.inf)
    comp = c[idx] @ fp.T[idx]
    return float(np.linalg.norm(comp))


# --- curvature relation (ambient vs induced) --------------------------------


class GaussEquationProbe:
    """Evaluates both sides of the curvature relation between the ambient and
    induced connections at one point, for tangent-frame 4-tuples.

    The left side is the ambient covariant curvature.  The right side
    assembles the induced curvature, the shape-operator terms, the nabla-h
    terms and the transversal-connection terms; every derivative of an
    extracted coefficient is a Richardson-extrapolated central difference
    along the parameter directions realising the frame fields.
    """

    def __init__(self, sc: SubmanifoldScenario, sp: SamplePoint, step: float = FD_STEP):
        self.sc = sc
        self.sp = sp
        self.step = step
        self.tab = sc.gw_table(sp)
        self.fp = self.tab.fp
        self.R4 = riemann_tensor(sc.metric, sp.ambient)
        self._dirs: dict[int, np.ndarray] = {}
        self._shifted: dict[tuple[int, float], GaussWeingartenTable] = {}
        self._dHL: dict[int, np.ndarray] = {}
        self._dHS: dict[int, np.ndarray] = {}
        self._dnab: dict[int, np.ndarray] = {}

    def _dir(self, a: int) -> np.ndarray:
        if a not in self._dirs:
            d, res = self.fp.tangent_param_dir(self.fp.T[a])
            if res > 1e-6:
                raise NullGeoError(
                    f"frame field {a} is not tangent (residual {res:.3e}); "
                    "cannot differentiate along it"
                )
            self._dirs[a] = d
        return self._dirs[a]

    def _table_at(self, a: int, t: float) -> GaussWeingartenTable:
        key = (a, t)
        if key not in self._shifted:
            u = self.sp.params + t * self._dir(a)
            sp = point_from_params(self.sc, u, index=-1)
            self._shifted[key] = GaussWeingartenTable(self.sc, sp)
        return self._shifted[key]

    def _fd_tables(self, a: int):
        """Richardson-extrapolated d/dt at t=0 of HL, HS and nab along T_a."""
        if a in self._dHL:
            return self._dHL[a], self._dHS[a], self._dnab[a]
        step = self.step
        for _ in range(4):
            try:
                tabs = {t: self._table_at(a, t) for t in (step, -step, step / 2, -step / 2)}
                break
            except EvalDomainError:
                self._shifted = {k: v for k, v in self._shifted.items() if k[0] != a}
                step /= 2.0
        else:
            raise EvalDomainError(
                f"finite-difference step along direction {a} keeps leaving the domain"
            )

        def deriv(get):
            d1 = (get(tabs[step]) - get(tabs[-step])) / (2 * step)
            d2 = (get(tabs[step / 2]) - get(tabs[-step / 2])) / step
            return (4.0 * d2 - d1) / 3.0

        self._dHL[a] = deriv(lambda t: t.HL)
        self._dHS[a] = deriv(lambda t: t.HS)
        self._dnab[a] = deriv(lambda t: t.nab)
        return self._dHL[a], self._dHS[a], self._dnab[a]

    def _tangent_coeffs(self, v: np.ndarray) -> np.ndarray:
        return self.fp.tangent_coeffs(v, tol=1e-6)

    def induced_curvature(self, ax: int, aw: int, az: int) -> np.ndarray:
        """R(T_ax, T_aw)T_az of the induced connection, ambient components."""
        tab, fp = self.tab, self.fp
        _, _, dnab_x = self._fd_tables(ax)
        _, _, dnab_w = self._fd_tables(aw)

        def nab_of(a: int, dnab_a, b: int, c: int) -> np.ndarray:
            # nab_{T_a}(nab_{T_b} T_c): FD derivative of the extracted field
            # plus the ambient connection term, projected tangentially.
            amb = dnab_a[b, c] + np.einsum(
                "kuv,u,v->k", tab.Gamma, fp.T[a], tab.nab[b, c]
            )
            return fp.tangential(fp.decompose(amb))

        first = nab_of(ax, dnab_x, aw, az)
        second = nab_of(aw, dnab_w, ax, az)
        # bracket term, pointwise exact
        br = (
            fp.FFjac[aw] @ fp.T[ax] - fp.FFjac[ax] @ fp.T[aw]
        )
        amb_br = fp.FFjac[az] @ br + np.einsum("kuv,u,v->k", tab.Gamma, br, fp.T[az])
        third = fp.tangential(fp.decompose(amb_br))
        return first - second - third

    def nabla_h(self, a: int, b: int, c: int):
        """((nab_{T_a} h^l)(T_b, T_c)_i, (nab_{T_a} h^s)(T_b, T_c)_al)."""
        tab = self.tab
        dHL, dHS, _ = self._fd_tables(a)
        nb = self._tangent_coeffs(tab.nab[a, b])
        nc = self._tangent_coeffs(tab.nab[a, c])
        hl = (
            dHL[b, c]
            + np.einsum("j,ji->i", tab.HL[b, c], tab.tau[a])
            - np.einsum("ti,t->i", tab.HL[:, c, :], nb)
            - np.einsum("ti,t->i", tab.HL[b, :, :], nc)
        )
        hs = (
            dHS[b, c]
            + np.einsum("b,ba->a", tab.HS[b, c], tab.sigma[a])
            - np.einsum("ta,t->a", tab.HS[:, c, :], nb)
            - np.einsum("ta,t->a", tab.HS[b, :, :], nc)
        )
        return hl, hs

    def sides(self, ax: int, aw: int, az: int, ay: int) -> tuple[float, float]:
        """(LHS, RHS) of the curvature relation for a tangent-frame 4-tuple."""
        tab, fp = self.tab, self.fp
        T = fp.T
        lhs = float(
            np.einsum("ijkl,i,j,k,l->", self.R4, T[ax], T[aw], T[az], T[ay])
        )

        y = T[ay]
        g = fp.G
        rhs = float(self.induced_curvature(ax, aw, az) @ g @ y)
        # shape-operator blocks
        for i in range(self.sc.r):
            rhs += tab.HL[ax, az, i] * float(tab.A_N[aw, i] @ g @ y)
            rhs -= tab.HL[aw, az, i] * float(tab.A_N[ax, i] @ g @ y)
        for al in range(tab.HS.shape[2]):
            rhs += tab.HS[ax, az, al] * float(tab.A_W[aw, al] @ g @ y)
            rhs -= tab.HS[aw, az, al] * float(tab.A_W[ax, al] @ g @ y)
        # nabla-h and transversal-connection blocks
        hlx, hsx = self.nabla_h(ax, aw, az)
        hlw, hsw = self.nabla_h(aw, ax, az)
        lamy = tab.lam[ay]
        wy = np.array([fp.pair(w, y) for w in fp.W]) if fp.W.shape[0] else np.zeros(0)
        rhs += float(hlx @ lamy) - float(hlw @ lamy)
        rhs += float(hsx @ wy) - float(hsw @ wy)
        # D^l terms: ltr component of nab_X h^s(W, Z)
        dl_x = np.einsum("a,ai->i", tab.HS[aw, az], tab.phi_form[ax])
        dl_w = np.einsum("a,ai->i", tab.HS[ax, az], tab.phi_form[aw])
        rhs += float(dl_x @ lamy) - float(dl_w @ lamy)
        # D^s terms: screen-transversal component of nab_X h^l(W, Z)
        ds_x = np.einsum("i,ia->a", tab.HL[aw, az], tab.rho[ax])
        ds_w = np.einsum("i,ia->a", tab.HL[ax, az], tab.rho[aw])
        rhs += float(ds_x @ wy) - float(ds_w @ wy)
        return lhs, rhs


def gauss_equation_residual(
    sc: SubmanifoldScenario,
    X: VectorField,
    W: VectorField,
    Z: VectorField,
    Y: VectorField,
    sp: SamplePoint,
    probe: GaussEquationProbe | None = None,
) -> float:
    """|LHS - RHS| of the curvature relation for tangent fields (expanded
    multilinearly over the tangent frame)."""
    probe = probe or GaussEquationProbe(sc, sp)
    fp = probe.fp
    p = sp.ambient
    cs = [fp.tangent_coeffs(F.value(p)) for F in (X, W, Z, Y)]
    m = sc.m
    lhs = rhs = 0.0
    for ax in range(m):
        if abs(cs[0][ax]) < 1e-15:
            continue
        for aw in range(m):
            if abs(cs[1][aw]) < 1e-15:
                continue
            for az in range(m):
                if abs(cs[2][az]) < 1e-15:
                    continue
                for ay in range(m):
                    wgt = cs[0][ax] * cs[1][aw] * cs[2][az] * cs[3][ay]
                    if abs(wgt) < 1e-15:
                        continue
                    l, r = probe.sides(ax, aw, az, ay)
                    lhs += wgt * l
                    rhs += wgt * r
    return abs(lhs - rhs)


# --- space-form curvature expression ----------------------------------------


class SpaceformTable:
    """Per-point tables for the space-form curvature expression over the
    full frame (tangent and transversal fields alike)."""

    def __init__(self, sc: SubmanifoldScenario, sp: SamplePoint):
        fp = sc.frame_point(sp)
        pd = sc.contact_point(sp.ambient)
        self.fp, self.pd = fp, pd
        F = fp.FF
        nfields = F.shape[0]
        jets = [vecjet(f, sp.ambient) for f in sc.all_fields()]
        self.nphi = np.zeros((nfields, nfields, sc.n))
        for a in range(nfields):
            for b in range(nfields):
                self.nphi[a, b] = nabla_phi_values(pd, F[a], jets[b])
        G = fp.G
        self.P = F @ G @ F.T
        self.PF = (F @ pd.Phi.T) @ G @ F.T          # PF[a,b] = gbar(phi F_a, F_b)
        HF = F @ pd.H.T                              # rows: H F_a
        self.gH = HF @ G @ F.T                       # gH[a,b] = gbar(H F_a, F_b)
        self.HH = HF @ G @ HF.T
        self.etaF = F @ pd.eta_vals
        self.G = G

    def value(self, x: int, w: int, z: int, y: int, cbar: float) -> float:
        G = self.G
        t = float(self.nphi[w, z] @ G @ self.nphi[x, y])
        t -= float(self.nphi[w, y] @ G @ self.nphi[x, z])
        t -= 2.0 * float(self.nphi[w, x] @ G @ self.nphi[y, z])
        t += self.gH[w, z] * self.gH[x, y]
        t -= self.gH[w, y] * self.gH[x, z]
        t -= 2.0 * self.gH[w, x] * self.gH[y, z]
        e = self.etaF
        t += -e[w] * e[y] * self.HH[x, z] + e[w] * e[z] * self.HH[x, y]
        t += e[x] * e[y] * self.HH[w, z] - e[x] * e[z] * self.HH[w, y]
        P, PF = self.P, self.PF
        cblock = (
            P[x, y] * P[z, w]
            - P[z, x] * P[y, w]
            + e[z] * e[x] * P[y, w]
            - e[y] * e[x] * P[z, w]
            + e[y] * e[w] * P[z, x]
            - e[z] * e[w] * P[y, x]
            + PF[y, x] * PF[z, w]
            - PF[z, x] * PF[y, w]
            - 2.0 * PF[z, y] * PF[x, w]
        )
        return (t + cbar * cblock) / 4.0


def spaceform_curvature(s, g, cbar: float, X, W, Z, Y, p) -> float:
    """The space-form curvature expression R(X, W, Z, Y) for a structure with
    constant phi-sectional curvature ``cbar``, evaluated pointwise."""
    from .contact import contact_point

    pd = contact_point(s, g, p)
    jets = {id(F): vecjet(F, p) for F in (X, W, Z, Y)}
    xv, wv, zv, yv = (jets[id(F)].vals for F in (X, W, Z, Y))
    G = pd.G

    def nphi(av, B):
        return nabla_phi_values(pd, av, jets[id(B)])

    def pr(u, v):
        return float(u @ G @ v)

    eta = pd.eta_of
    h = pd.h_of
    phi = pd.phi_of
    t = pr(nphi(wv, Z), nphi(xv, Y))
    t -= pr(nphi(wv, Y), nphi(xv, Z))
    t -= 2.0 * pr(nphi(wv, X), nphi(yv, Z))
    t += pr(h(wv), zv) * pr(h(xv), yv)
    t -= pr(h(wv), yv) * pr(h(xv), zv)
    t -= 2.0 * pr(h(wv), xv) * pr(h(yv), zv)
    t += -eta(wv) * eta(yv) * pr(h(xv), h(zv)) + eta(wv) * eta(zv) * pr(h(xv), h(yv))
    t += eta(xv) * eta(yv) * pr(h(wv), h(zv)) - eta(xv) * eta(zv) * pr(h(wv), h(yv))
    cblock = (
        pr(xv, yv) * pr(zv, wv)
        - pr(zv, xv) * pr(yv, wv)
        + eta(zv) * eta(xv) * pr(yv, wv)
        - eta(yv) * eta(xv) * pr(zv, wv)
        + eta(yv) * eta(wv) * pr(zv, xv)
        - eta(zv) * eta(wv) * pr(yv, xv)
        + pr(phi(yv), xv) * pr(phi(zv), wv)
        - pr(phi(zv), xv) * pr(phi(yv), wv)
        - 2.0 * pr(phi(zv), yv) * pr(phi(xv), wv)
    )
    return (t + cbar * cblock) / 4.0


# --- phi-sectional curvature from the irrotational relation -----------------


@dataclass
class CbarEstimate:
    value: float
    source: str  # "irrotational-formula" | "sign-relation" | "declared"
    sign_class: str  # "zero" | "nonnegative" | "nonpositive" | "null-flagged"
    b: float
    h_pairing: float  # gbar(H E, H E)
    contradiction: str | None = None


def cbar_from_pairing(b: float, h_pairing: float) -> float:
    return -h_pairing / (b * b) + 0.0  # +0.0 normalises -0.0


def classify_h_vector(h_pairing: float, h_norm: float, tol: float = 1e-10) -> str:
    if h_norm < tol:
        return "zero"
    if h_pairing > tol:
        return "nonpositive"  # space-like H E forces cbar <= 0
    if h_pairing < -tol:
        return "nonnegative"  # time-like H E forces cbar >= 0
    return "null-flagged"


def cbar_from_irrotational(sc: SubmanifoldScenario, sp: SamplePoint, tol: float = 1e-10) -> CbarEstimate:
    """cbar = -gbar(H E, H E)/eta(E)^2 for a radical field E in D2 with
    eta(E) != 0, valid on irrotational ascreen scenarios (preconditions are
    the caller's: see runner)."""
    q = sc.qgcr
    if q is None or not q.d2:
        raise NullGeoError("no D2 declaration to draw E from")
    fp = sc.frame_point(sp)
    pd = sc.contact_point(sp.ambient)
    ev = fp.E[q.d2[0]]
    b = pd.eta_of(ev)
    if abs(b) < tol:
        return CbarEstimate(
            value=float("nan"), source="irrotational-formula", sign_class="undefined",
            b=b, h_pairing=float("nan"),
            contradiction="eta(E) = 0 on D2 contradicts the ascreen assumption",
        )
    he = pd.h_of(ev)
    hp = pd.pair(he, he)
    return CbarEstimate(
        value=cbar_from_pairing(b, hp),
        source="irrotational-formula",
        sign_class=classify_h_vector(hp, float(np.linalg.norm(he)), tol),
        b=b,
        h_pairing=hp,
    )


# --- sign relation for umbilical scenarios (s30-style) ----------------------


@dataclass
class CurvatureSignRecord:
    lhs: float
    rhs: float
    residual: float
    rhs_nonnegative: bool
    eta_x: float
    eta_z: float
    skipped: str | None = None


def curvature_sign_relation(
    sc: SubmanifoldScenario,
    sp: SamplePoint,
    cbar: float,
    x_screen: int,
    z_screen: int,
    tol: float = 1e-8,
    umbilical_ok: bool = True,
) -> CurvatureSignRecord:
    """cbar |X|^2 |Z|^2 = |(nab_Z phi)X|^2 + gbar(Z, H X)^2 for X in D0 and Z
    in phi(S), both space-like, on umbilical (or geodesic) scenarios with D0
    and phi(S) parallel."""
    fp = sc.frame_point(sp)
    pd = sc.contact_point(sp.ambient)
    q = sc.qgcr
    if q is None:
        return CurvatureSignRecord(0, 0, 0, True, 0, 0, skipped="no QGCR declaration")
    if not umbilical_ok:
        return CurvatureSignRecord(0, 0, 0, True, 0, 0, skipped="scenario is not umbilical or geodesic")
    xv = fp.X[x_screen]
    zv = fp.X[z_screen]
    gx, gz = fp.pair(xv, xv), fp.pair(zv, zv)
    if gx <= 0 or gz <= 0:
        return CurvatureSignRecord(0, 0, 0, True, 0, 0, skipped="X or Z is not space-like")
    par = parallelism_residual(sc, sp)
    if par > tol:
        return CurvatureSignRecord(
            0, 0, 0, True, 0, 0, skipped=f"D0/phi(S) parallelism fails (residual {par:.3e})"
        )
    nz = nabla_phi_values(pd, zv, vecjet(sc.screen[x_screen], sp.ambient))
    lhs = cbar * gx * gz
    rhs = pd.pair(nz, nz) + pd.pair(zv, pd.h_of(xv)) ** 2
    return CurvatureSignRecord(
        lhs=lhs,
        rhs=rhs,
        residual=abs(lhs - rhs),
        rhs_nonnegative=rhs >= -tol,
        eta_x=pd.eta_of(xv),
        eta_z=pd.eta_of(zv),
    )


def parallelism_residual(sc: SubmanifoldScenario, sp: SamplePoint) -> float:
    """Worst leak of nab_X Y outside the distribution of Y, for Y in D0 and in
    phi(S), X over the whole tangent frame."""
    tab = sc.gw_table(sp)
    fp = tab.fp
    q = sc.qgcr
    worst = 0.0
    groups = [
        [sc.r + j for j in q.d0],
        [sc.r + j for j in q.phi_s],
    ]
    for grp in groups:
        others = [t for t in range(sc.m) if t not in grp]
        for a in range(sc.m):
            for b in grp:
                c = fp.tangent_coeffs(tab.nab[a, b], tol=np.inf)
                if others:
                    leak = c[others] @ fp.T[others]
                    worst = max(worst, float(np.max(np.abs(leak), initial=0.0)))
    return worst


# --- skew pairing of the drift operator --------------------------------------


def skew_pairing_residual(G: np.ndarray, H: np.ndarray, xv: np.ndarray, yv: np.ndarray) -> float:
    """|gbar(Y, H X) + gbar(X, H Y)|: forced by skew-adjointness of H."""
    return abs(float(yv @ G @ (H @ xv)) + float(xv @ G @ (H @ yv)))


def skew_pairing_check(sc: SubmanifoldScenario, sp: SamplePoint) -> float:
    """Worst skew-pairing residual over D x D at a point."""
    fp = sc.frame_point(sp)
    pd = sc.contact_point(sp.ambient)
    idx = _d_indices(sc)
    worst = 0.0
    for a in idx:
        for b in idx:
            worst = max(worst, skew_pairing_residual(fp.G, pd.H, fp.T[a], fp.T[b]))
    return worst


# --- parallelism probes (discrepancy flags) ----------------------------------


@dataclass
class ProbeResult:
    screen_index: int
    membership_residual: float     # distance of nab_{X_a}X_a from span{X_a}
    computed_coefficient: float
    computed_match_residual: float
    declared_coefficient: float | None
    discrepancy: str | None


def run_parallelism_probe(sc: SubmanifoldScenario, sp: SamplePoint, probe) -> ProbeResult:
    """Check that nab_{X_a}X_a stays on the declared screen line, that its
    coefficient matches the scenario's computed expression, and flag a
    discrepancy when a declared (stated) coefficient disagrees."""
    tab = sc.gw_table(sp)
    fp = tab.fp
    a = sc.r + probe.screen_index
    v = tab.nab[a, a]
    line = fp.X[probe.screen_index]
    denom = float(line @ line)
    coef = float(v @ line) / denom
    mem = float(np.linalg.norm(v - coef * line))
    arr = probe.computed_coefficient.bind(sc.bindings)
    comp = probe.computed_coefficient.jet(sp.ambient, arr, order=0)[0]
    declared = None
    note = None
    if probe.declared_coefficient is not None:
        darr = probe.declared_coefficient.bind(sc.bindings)
        declared = probe.declared_coefficient.jet(sp.ambient, darr, order=0)[0]
        if not math.isclose(declared, comp, rel_tol=1e-9, abs_tol=1e-12):
            note = (
                f"tangential coefficient of nab_X X along screen[{probe.screen_index}] "
                f"computes to {probe.computed_coefficient.render()} (derived, verified at "
                f"sampled points), scenario states {probe.declared_coefficient.render()}; "
                "span membership, hence the distribution-parallelism conclusion, is unaffected"
            )
    return ProbeResult(
        screen_index=probe.screen_index,
        membership_residual=mem,
        computed_coefficient=coef,
        computed_match_residual=abs(coef - comp),
        declared_coefficient=declared,
        discrepancy=note,
    )
