"""QGCR and ascreen classification: distribution membership, the xi
decomposition over the quasi-orthonormal frame, and the radical pairing
normalisation.

Membership and span equality use Euclidean least squares on ambient
components (design choice: the ambient pairing is degenerate on the tangent
bundle, so metric projections are unusable there).  Distribution equality is
mutual membership of basis vectors, which makes every verdict invariant under
rescaling of declared frame fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FrameError
from .nullsub import (
    FramePoint,
    SamplePoint,
    SubmanifoldScenario,
    mutual_span_residual,
    span_residual,
)

MEMBERSHIP_TOL = 1e-8


@dataclass
class QGCRVerdict:
    d1_invariant: float
    d2_into_screen: float
    screen_split: float
    d0_invariant: float
    image_spans: float
    proper: bool
    dims: tuple[int, int, int, int, int, int]  # (r, dim D1, dim D2, dim D0, dim M, dim ambient)
    dim_bounds_ok: bool
    notes: list[str]

    def passes(self, tol: float = MEMBERSHIP_TOL) -> bool:
        return (
            max(self.d1_invariant, self.d2_into_screen, self.screen_split, self.d0_invariant)
            < tol
        )


@dataclass
class XiDecomposition:
    xi_screen: np.ndarray   # coefficients of xi_S over the screen frame
    a: np.ndarray           # coefficient of E_i, equal to eta(N_i)
    b: np.ndarray           # coefficient of N_i, equal to eta(E_i)
    c: np.ndarray           # coefficient of W_al, equal to eta(W_al)/eps_al
    reconstruction_residual: float


def _decl(sc: SubmanifoldScenario):
    if sc.qgcr is None:
        raise FrameError("scenario declares no QGCR decomposition")
    return sc.qgcr


def _rows(mat: np.ndarray, idx) -> np.ndarray:
    return mat[list(idx)] if len(idx) else np.zeros((0, mat.shape[1]))


def verify_qgcr(sc: SubmanifoldScenario, sp: SamplePoint) -> QGCRVerdict:
    """Check the declared QGCR decomposition at one point.

    Residuals per condition: D1 phi-invariance (mutual), phi(D2) inside the
    screen bundle, the screen split S(TM) = {phi(D2) (+) Dbar} perp D0 with
    Dbar = phi(S) (+) phi(L), and phi-invariance of D0.  Failures are verdict
    values, never exceptions.
    """
    q = _decl(sc)
    fp = sc.frame_point(sp)
    pd = sc.contact_point(sp.ambient)
    Phi = pd.Phi

    d1 = _rows(fp.E, q.d1)
    d2 = _rows(fp.E, q.d2)
    d0 = _rows(fp.X, q.d0)
    phi_d2_decl = _rows(fp.X, q.phi_d2)
    phi_l_decl = _rows(fp.X, q.phi_l)
    phi_s_decl = _rows(fp.X, q.phi_s)
    l_rows = _rows(fp.N, q.ltr_l)
    s_rows = _rows(fp.W, q.s_s)

    notes: list[str] = []

    # (i) phi D1 = D1 and phi D2 inside S(TM)
    d1_inv = mutual_span_residual(d1 @ Phi.T, d1)
    d2_img = d2 @ Phi.T
    d2_into_screen = span_residual(d2_img, fp.X)

    # declared images must match the computed ones
    image_spans = 0.0
    if len(d2_img):
        image_spans = max(image_spans, mutual_span_residual(d2_img, phi_d2_decl))
    if len(l_rows):
        image_spans = max(image_spans, mutual_span_residual(l_rows @ Phi.T, phi_l_decl))
    if len(s_rows):
        image_spans = max(image_spans, mutual_span_residual(s_rows @ Phi.T, phi_s_decl))

    # (ii) S(TM) = {phi D2 (+) Dbar} perp D0, Dbar = phi S (+) phi L
    dbar = np.vstack([phi_s_decl, phi_l_decl])
    split_members = np.vstack([phi_d2_decl, dbar, d0])
    split = mutual_span_residual(split_members, fp.X)
    ortho = 0.0
    rest = np.vstack([phi_d2_decl, dbar])
    for u in d0:
        for v in rest:
            ortho = max(ortho, abs(fp.pair(u, v)))
    screen_split = max(split, ortho)

    d0_inv = mutual_span_residual(d0 @ Phi.T, d0) if len(d0) else 0.0

    r = sc.r
    dims = (r, len(q.d1), len(q.d2), len(q.d0), sc.m, sc.n)
    proper = all(len(ix) > 0 for ix in (q.d1, q.d0, q.d2, q.s_s))
    dim_d = len(q.d0) + len(q.d1)
    dim_bounds_ok = True
    if proper:
        dim_bounds_ok = (
            len(q.d1) >= 2
            and r >= 3
            and dim_d >= 4
            and sc.m >= 7
            and sc.n >= 11
            and r < min(sc.m, sc.codim)
        )
        if not dim_bounds_ok:
            notes.append(
                f"proper QGCR dimension bounds violated: dims={dims}, dim D={dim_d}"
            )
    if sc.r and sc.r >= min(sc.m, sc.codim):
        proper = False
        notes.append(
            "isotropic/co-isotropic/totally-null declaration rejected "
            f"(r={sc.r}, m={sc.m}, codim={sc.codim})"
        )

    return QGCRVerdict(
        d1_invariant=d1_inv,
        d2_into_screen=d2_into_screen,
        screen_split=screen_split,
        d0_invariant=d0_inv,
        image_spans=image_spans,
        proper=proper,
        dims=dims,
        dim_bounds_ok=dim_bounds_ok,
        notes=notes,
    )


def xi_decompose(sc: SubmanifoldScenario, sp: SamplePoint) -> XiDecomposition:
    """Expand xi over the quasi-orthonormal frame via metric pairings:
    coefficient of E_i is eta(N_i), of N_i is eta(E_i), of W_al is
    eta(W_al)/eps_al; whatever remains is the screen part."""
    fp = sc.frame_point(sp)
    pd = sc.contact_point(sp.ambient)
    xiv = pd.xi.vals

    a = np.array([pd.eta_of(nv) for nv in fp.N])
    b = np.array([pd.eta_of(ev) for ev in fp.E])
    c = np.array(
        [pd.eta_of(wv) / fp.eps[al] for al, wv in enumerate(fp.W)]
    ) if fp.W.shape[0] else np.zeros(0)

    rest = xiv.copy()
    if sc.r:
        rest -= a @ fp.E + b @ fp.N
    if fp.W.shape[0]:
        rest -= c @ fp.W
    # solve the remainder against the screen frame (nondegenerate block)
    if fp.X.shape[0]:
        Gscr = fp.X @ fp.G @ fp.X.T
        xi_screen = np.linalg.solve(Gscr, fp.X @ fp.G @ rest)
    else:
        xi_screen = np.zeros(0)

    recon = xi_screen @ fp.X if fp.X.shape[0] else np.zeros(sc.n)
    if sc.r:
        recon = recon + a @ fp.E + b @ fp.N
    if fp.W.shape[0]:
        recon = recon + c @ fp.W
    resid = float(np.max(np.abs(recon - xiv)))
    return XiDecomposition(xi_screen=xi_screen, a=a, b=b, c=c, reconstruction_residual=resid)


@dataclass
class AscreenChecks:
    xi_rad_ltr: float        # |xi_S| and |c| components (xi in Rad (+) ltr)
    xi_in_d2_l: float        # membership of xi in span(D2 u L)
    phi_l_eq_phi_d2: float | None  # span equality (3-null case), else None
    reconstruction: float


def verify_ascreen(sc: SubmanifoldScenario, sp: SamplePoint) -> AscreenChecks:
    q = _decl(sc)
    fp = sc.frame_point(sp)
    pd = sc.contact_point(sp.ambient)
    dec = xi_decompose(sc, sp)

    amp = float(np.max(np.abs(dec.xi_screen), initial=0.0))
    if dec.c.size:
        amp = max(amp, float(np.max(np.abs(dec.c))))

    basis = np.vstack([_rows(fp.E, q.d2), _rows(fp.N, q.ltr_l)])
    xi_mem = span_residual(pd.xi.vals[None, :], basis)

    phi_eq = None
    if sc.r == 3:
        Phi = pd.Phi
        phi_eq = mutual_span_residual(
            _rows(fp.N, q.ltr_l) @ Phi.T, _rows(fp.E, q.d2) @ Phi.T
        )
    return AscreenChecks(
        xi_rad_ltr=amp,
        xi_in_d2_l=xi_mem,
        phi_l_eq_phi_d2=phi_eq,
        reconstruction=dec.reconstruction_residual,
    )


@dataclass
class XiPairingResult:
    """2 eta(E) eta(N) for E in D2, N in L; equals 1 when xi = eta(N)E + eta(E)N
    and gbar(xi, xi) = 1."""

    value: float
    residual: float
    skipped: str | None = None


def xi_pairing_check(sc: SubmanifoldScenario, sp: SamplePoint, ascreen_tol: float = MEMBERSHIP_TOL) -> XiPairingResult:
    q = _decl(sc)
    asc = verify_ascreen(sc, sp)
    if asc.xi_rad_ltr > ascreen_tol or asc.xi_in_d2_l > ascreen_tol:
        return XiPairingResult(value=float("nan"), residual=float("nan"), skipped="scenario is not ascreen at this point")
    if not q.d2 or not q.ltr_l:
        return XiPairingResult(value=float("nan"), residual=float("nan"), skipped="empty D2 or L declaration")
    fp = sc.frame_point(sp)
    pd = sc.contact_point(sp.ambient)
    ev = fp.E[q.d2[0]]
    nv = fp.N[q.ltr_l[0]]
    val = 2.0 * pd.eta_of(ev) * pd.eta_of(nv)
    return XiPairingResult(value=val, residual=abs(val - 1.0))
