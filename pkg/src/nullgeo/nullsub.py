"""Null-submanifold scenarios: sampling, frame validation, radical detection,
transversal construction, and Gauss-Weingarten coefficient extraction.

A scenario DECLARES its frames and distribution roles; the engine VERIFIES
them (screen choices are not canonical, so verification against a declared
choice is the honest contract).  Coefficient extraction never inverts the
degenerate induced metric: every decomposition solves one small linear system
against the full quasi-orthonormal frame Gram matrix, which stays invertible.

Frame index layout at a point (m = dim M, r = radical rank, n = ambient dim):

    full frame rows:  [E_1..E_r | X_{r+1}..X_m | N_1..N_r | W_{r+1}..W_codim]
    indices:           0..r-1     r..m-1         m..m+r-1   m+r..n-1
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contact import AlmostContactStructure, ContactPointData, contact_point
from .errors import FrameError, RankAmbiguityError
from .expr import Expression
from .geometry import MetricField, VectorField, christoffel

RANK_TOL_DEFAULT = 1e-9
GRAM_CONDITION_LIMIT = 1e10


@dataclass(frozen=True)
class QGCRDecl:
    """Declared distribution roles, as index sets into the frame lists."""

    d1: tuple[int, ...]       # subset of rad
    d2: tuple[int, ...]       # subset of rad
    d0: tuple[int, ...]       # subset of screen
    phi_d2: tuple[int, ...]   # image of phi(D2), subset of screen
    ltr_l: tuple[int, ...]    # L, subset of ltr
    s_s: tuple[int, ...]      # S, subset of stransversal
    phi_l: tuple[int, ...]    # image of phi(L), subset of screen
    phi_s: tuple[int, ...]    # image of phi(S), subset of screen


@dataclass(frozen=True)
class ParallelismProbe:
    """Declared expectation for the screen-connection coefficient of
    nab_{X_a}X_a along a screen field, used to emit discrepancy flags when a
    scenario's stated coefficient disagrees with the computed one."""

    screen_index: int
    declared_coefficient: Expression | None
    computed_coefficient: Expression


@dataclass
class SubmanifoldScenario:
    name: str
    coords: tuple[str, ...]
    metric: MetricField
    structure: AlmostContactStructure | None
    param_names: tuple[str, ...]
    param_map: tuple[Expression, ...]      # one per ambient coordinate, over params
    rad: list[VectorField]
    screen: list[VectorField]
    ltr: list[VectorField]
    stransversal: list[VectorField]
    qgcr: QGCRDecl | None
    boxes: dict[str, tuple[float, float]]
    count: int = 20
    seed: int = 42
    tolerances: dict[str, float] = field(default_factory=dict)
    probes: list[ParallelismProbe] = field(default_factory=list)
    rank_tol: float = RANK_TOL_DEFAULT
    bindings: dict | None = None

    def __post_init__(self):
        self._frame_cache: dict[bytes, FramePoint] = {}
        self._contact_cache: dict[bytes, ContactPointData] = {}
        self._gw_cache: dict[bytes, GaussWeingartenTable] = {}
        self._pm_arrays = tuple(e.bind(self.bindings) for e in self.param_map)

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def r(self) -> int:
        return len(self.rad)

    @property
    def m(self) -> int:
        return len(self.rad) + len(self.screen)

    @property
    def codim(self) -> int:
        return self.n - self.m

    def tangent_fields(self) -> list[VectorField]:
        return list(self.rad) + list(self.screen)

    def all_fields(self) -> list[VectorField]:
        return list(self.rad) + list(self.screen) + list(self.ltr) + list(self.stransversal)

    def param_jet(self, u):
        """Ambient point and pushforward Jacobian ``J[k, a] = dPhi^k/du_a``."""
        n, mpar = self.n, len(self.param_names)
        point = np.zeros(n)
        J = np.zeros((n, mpar))
        for k, (e, a) in enumerate(zip(self.param_map, self._pm_arrays)):
            v, g, _ = e.jet(u, a, order=1)
            point[k] = v
            J[k] = g
        return point, J

    def ambient_point(self, u) -> np.ndarray:
        return np.array(
            [e.jet(u, a, order=0)[0] for e, a in zip(self.param_map, self._pm_arrays)]
        )

    def frame_point(self, sp: "SamplePoint") -> "FramePoint":
        key = sp.params.tobytes()
        if key not in self._frame_cache:
            self._frame_cache[key] = FramePoint(self, sp)
        return self._frame_cache[key]

    def contact_point(self, p) -> ContactPointData:
        key = np.asarray(p).tobytes()
        if key not in self._contact_cache:
            if self.structure is None:
                raise FrameError("scenario has no almost contact structure")
            self._contact_cache[key] = contact_point(self.structure, self.metric, p)
        return self._contact_cache[key]

    def gw_table(self, sp: "SamplePoint") -> "GaussWeingartenTable":
        key = sp.params.tobytes()
        if key not in self._gw_cache:
            self._gw_cache[key] = GaussWeingartenTable(self, sp)
        return self._gw_cache[key]


@dataclass(frozen=True)
class SamplePoint:
    index: int
    params: np.ndarray
    ambient: np.ndarray


def sample_points(sc: SubmanifoldScenario, count: int | None = None, seed: int | None = None):
    """Deterministic parameter draws inside the declared boxes, pushed through
    the parametrisation (so constraints hold exactly, e.g. y5 == sqrt(x5))."""
    count = sc.count if count is None else count
    seed = sc.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        u = np.array([rng.uniform(*sc.boxes[name]) for name in sc.param_names])
        out.append(SamplePoint(index=i, params=u, ambient=sc.ambient_point(u)))
    return out


def point_from_params(sc: SubmanifoldScenario, u, index: int = 0) -> SamplePoint:
    u = np.asarray(u, dtype=np.float64)
    return SamplePoint(index=index, params=u, ambient=sc.ambient_point(u))


class FramePoint:
    """All frame values, pairings and the full-frame Gram solve at one point."""

    def __init__(self, sc: SubmanifoldScenario, sp: SamplePoint):
        self.sc = sc
        self.sp = sp
        p = sp.ambient
        self.G = sc.metric.value(p)

        def stack(fields):
            if not fields:
                return np.zeros((0, sc.n)), np.zeros((0, sc.n, sc.n))
            vals, jacs = [], []
            for f in fields:
                v, j = f.jet1(p)
                vals.append(v)
                jacs.append(j)
            return np.array(vals), np.array(jacs)

        self.E, self.Ejac = stack(sc.rad)
        self.X, self.Xjac = stack(sc.screen)
        self.N, self.Njac = stack(sc.ltr)
        self.W, self.Wjac = stack(sc.stransversal)
        self.T = np.vstack([self.E, self.X]) if sc.m else np.zeros((0, sc.n))
        self.FF = np.vstack([self.E, self.X, self.N, self.W])
        self.FFjac = np.concatenate([self.Ejac, self.Xjac, self.Njac, self.Wjac])
        if self.FF.shape[0] != sc.n:
            raise FrameError(
                f"frame has {self.FF.shape[0]} fields, ambient dimension is {sc.n}"
            )
        self.GF = self.FF @ self.G @ self.FF.T
        svals = np.linalg.svd(self.GF, compute_uv=False)
        if svals[-1] == 0.0 or svals[0] / svals[-1] > GRAM_CONDITION_LIMIT:
            raise FrameError(
                "full-frame Gram matrix is numerically singular at "
                f"point {sp.index} (condition {svals[0] / max(svals[-1], 1e-300):.3e})"
            )
        self._GFinv = np.linalg.inv(self.GF)
        self.eps = np.array([self.pair(w, w) for w in self.W])
        self.point, self.Jphi = sc.param_jet(sp.params)

    def pair(self, u, v) -> float:
        return float(u @ self.G @ v)

    def decompose(self, v) -> np.ndarray:
        """Coefficients of v in the full quasi-orthonormal frame."""
        return self._GFinv @ (self.FF @ (self.G @ v))

    def reconstruction_residual(self, v, coeffs) -> float:
        return float(np.max(np.abs(v - coeffs @ self.FF)))

    def tangential(self, coeffs) -> np.ndarray:
        m = self.sc.m
        return coeffs[:m] @ self.FF[:m]

    def tangent_param_dir(self, v) -> tuple[np.ndarray, float]:
        """Parameter-space direction realising the tangent vector v, plus the
        tangency residual (relative)."""
        c, *_ = np.linalg.lstsq(self.Jphi, v, rcond=None)
        resid = float(np.linalg.norm(self.Jphi @ c - v) / max(np.linalg.norm(v), 1.0))
        return c, resid

    def tangent_coeffs(self, v, tol: float = 1e-8) -> np.ndarray:
        """Tangent-frame coefficients of a tangent vector (errors if v has a
        transversal component above tol)."""
        c = self.decompose(v)
        m = self.sc.m
        leak = float(np.max(np.abs(c[m:]), initial=0.0))
        scale = max(float(np.max(np.abs(c), initial=0.0)), 1.0)
        if leak > tol * scale:
            raise FrameError(f"vector is not tangent (transversal leak {leak:.3e})")
        return c[:m]


@dataclass
class RadicalRank:
    r: int
    kernel: np.ndarray   # (r, m) kernel basis in tangent-frame coordinates
    eigvals: np.ndarray  # tangent Gram eigenvalues, |.|-ascending


def radical_rank(sc: SubmanifoldScenario, sp: SamplePoint, tol: float | None = None) -> RadicalRank:
    """Rank of the induced-metric kernel from the tangent-frame Gram matrix.

    Requires the tangent frame itself to be linearly independent, and errors
    if the kept/dropped eigenvalue gap is under 10x (ambiguous rank).
    """
    tol = sc.rank_tol if tol is None else tol
    fp = sc.frame_point(sp)
    m = sc.m
    tsv = np.linalg.svd(fp.T, compute_uv=False)
    if m and (tsv[-1] == 0.0 or tsv[0] / tsv[-1] > GRAM_CONDITION_LIMIT):
        raise FrameError(f"tangent frame does not span an {m}-dimensional space")
    Gt = fp.T @ fp.G @ fp.T.T
    ev, vec = np.linalg.eigh(0.5 * (Gt + Gt.T))
    order = np.argsort(np.abs(ev))
    ev, vec = ev[order], vec[:, order]
    scale = float(np.max(np.abs(ev), initial=0.0))
    if scale == 0.0:
        return RadicalRank(r=m, kernel=np.eye(m), eigvals=ev)
    thr = tol * scale
    r = int(np.sum(np.abs(ev) < thr))
    if 0 < r < m:
        dropped = np.abs(ev[:r]).max()
        kept = np.abs(ev[r:]).min()
        if dropped > 0 and kept / dropped < 10.0:
            raise RankAmbiguityError(np.abs(ev), thr)
    return RadicalRank(r=r, kernel=vec[:, :r].T.copy(), eigvals=ev)


def construct_ltr(sc: SubmanifoldScenario, sp: SamplePoint) -> np.ndarray:
    """Candidate null transversal frame from the declared rad/screen/W frames:
    rows N_i with gbar(N_i, E_j) = delta_ij, gbar(N_i, N_j) = 0, N_i
    orthogonal to S(TM) and S(TM^perp).  Returns an (r, n) array."""
    fp = sc.frame_point(sp)
    r, n = sc.r, sc.n
    if r == 0:
        return np.zeros((0, n))
    A = np.vstack([fp.E, fp.X, fp.W]) @ fp.G
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] == 0.0 or sv[0] / sv[-1] > GRAM_CONDITION_LIMIT:
        raise FrameError(
            "transversal construction failed: pairing system singular "
            f"(singular values {[f'{s:.2e}' for s in sv]})"
        )
    V = np.zeros((r, n))
    for i in range(r):
        b = np.zeros(A.shape[0])
        b[i] = 1.0
        V[i], *_ = np.linalg.lstsq(A, b, rcond=None)
    B = V @ fp.G @ V.T
    return V - 0.5 * B @ fp.E


def span_residual(vectors: np.ndarray, basis: np.ndarray) -> float:
    """Worst relative least-squares residual of rows of ``vectors`` against the
    row span of ``basis`` (Euclidean; works for degenerate metric pairings)."""
    if len(vectors) == 0:
        return 0.0
    if len(basis) == 0:
        return float(np.max(np.linalg.norm(vectors, axis=1)))
    worst = 0.0
    Bt = basis.T
    for v in vectors:
        c, *_ = np.linalg.lstsq(Bt, v, rcond=None)
        worst = max(worst, float(np.linalg.norm(Bt @ c - v) / max(np.linalg.norm(v), 1e-30)))
    return worst


def mutual_span_residual(a: np.ndarray, b: np.ndarray) -> float:
    return max(span_residual(a, b), span_residual(b, a))


class GaussWeingartenTable:
    """All Gauss-Weingarten data at one point, for every (tangent direction,
    frame field) pair.

    Arrays (a ranges over the m tangent fields, b over all n frame fields):

    - ``D[a, b]``       ambient nab_{T_a} F_b
    - ``C[a, b]``       its full-frame coefficients
    - ``HL[a, b, i]``   h^l_i(T_a, T_b)      (b < m)
    - ``HS[a, b, al]``  h^s_al(T_a, T_b)     (b < m)
    - ``nab[a, b]``     induced nab_{T_a} T_b (tangential part)
    - ``A_N[a, i]``, ``A_star[a, i]``, ``A_W[a, al]``  shape-operator values
    - ``tau[a, i, j]``, ``rho[a, i, al]``, ``phi_form[a, al, i]``,
      ``sigma[a, al, be]``  transversal connection forms
    - ``hstar[a, i, bs]``  screen second fundamental forms (bs over screen)
    - ``lam[a, i]``     lambda_i(T_a) = gbar(T_a, N_i)
    """

    def __init__(self, sc: SubmanifoldScenario, sp: SamplePoint):
        self.sc = sc
        self.sp = sp
        fp = sc.frame_point(sp)
        self.fp = fp
        p = sp.ambient
        self.Gamma = christoffel(sc.metric, p)
        r, m, n = sc.r, sc.m, sc.n
        nw = n - m - r

        T, FF = fp.T, fp.FF
        # nab_{T_a} F_b from frame jets: D[a,b,k] = T_a^l d_l F_b^k + Gamma^k(T_a, F_b)
        self.D = np.einsum("al,bkl->abk", T, fp.FFjac) + np.einsum(
            "kuv,au,bv->abk", self.Gamma, T, FF
        )
        # decompose everything against the frame Gram
        rhs = np.einsum("abk,kj,tj->abt", self.D, fp.G, FF)
        self.C = np.einsum("st,abt->abs", fp._GFinv, rhs)

        self.HL = self.C[:, :m, m : m + r].copy()
        self.HS = self.C[:, :m, m + r :].copy()
        self.nab = np.einsum("abt,tk->abk", self.C[:, :m, :m], T)
        self.A_N = -np.einsum("ait,tk->aik", self.C[:, m : m + r, :m], T)
        self.A_W = -np.einsum("ait,tk->aik", self.C[:, m + r :, :m], T)
        self.A_star = -np.einsum(
            "ait,tk->aik", self.C[:, :r, r:m], FF[r:m]
        ) if r else np.zeros((m, 0, n))
        self.tau = self.C[:, m : m + r, m : m + r].copy()
        self.rho = self.C[:, m : m + r, m + r :].copy()
        self.phi_form = self.C[:, m + r :, m : m + r].copy()
        self.sigma = self.C[:, m + r :, m + r :].copy()
        # tau via the radical equation: rad coeff j of nab_X E_i is -tau_ji(X)
        self.tau_from_rad = -self.C[:, :r, :r].transpose(0, 2, 1).copy()
        self.hstar = self.C[:, r:m, :r].transpose(0, 2, 1).copy()  # [a, i, bs]
        self.lam = np.einsum("ak,kj,ij->ai", T, fp.G, fp.N) if r else np.zeros((m, 0))
        self.Gt = T @ fp.G @ T.T
        # directional derivatives of tangent pairings: dpair[a,b,c] = T_a(gbar(T_b,T_c))
        _, dG = sc.metric.jet1(p)
        term_g = np.einsum("al,lij,bi,cj->abc", T, dG, T, T)
        term_b = np.einsum("al,bil,ij,cj->abc", T, fp.FFjac[:m], fp.G, T)
        term_c = np.einsum("al,bi,ij,cjl->abc", T, T, fp.G, fp.FFjac[:m])
        self.dpair = term_g + term_b + term_c

    def copy(self):
        """Shallow copy with private coefficient arrays (safe to inject into)."""
        import copy

        out = copy.copy(self)
        for name in ("HL", "HS", "nab", "A_star", "A_N", "A_W"):
            setattr(out, name, getattr(self, name).copy())
        return out

    # --- residual suites -------------------------------------------------

    def reconstruction_residual(self) -> float:
        resum = np.einsum("abt,tk->abk", self.C, self.fp.FF)
        return float(np.max(np.abs(self.D - resum)))

    def h_symmetry_residuals(self) -> tuple[float, float]:
        hl = float(np.max(np.abs(self.HL - self.HL.transpose(1, 0, 2)), initial=0.0))
        hs = float(np.max(np.abs(self.HS - self.HS.transpose(1, 0, 2)), initial=0.0))
        return hl, hs

    def tau_consistency_residual(self) -> float:
        return float(np.max(np.abs(self.tau - self.tau_from_rad), initial=0.0))

    def nonmetricity_residual(self) -> float:
        """(nab_X g)(Y,Z) - sum_i {h^l_i(X,Y) lam_i(Z) + h^l_i(X,Z) lam_i(Y)}."""
        m = self.sc.m
        nab_g = (
            self.dpair
            - np.einsum("abk,kj,cj->abc", self.nab, self.fp.G, self.fp.T)
            - np.einsum("bk,kj,acj->abc", self.fp.T, self.fp.G, self.nab)
        )
        rhs = np.einsum("abi,ci->abc", self.HL, self.lam) + np.einsum(
            "aci,bi->abc", self.HL, self.lam
        )
        return float(np.max(np.abs(nab_g - rhs), initial=0.0))

    def screen_metric_residual(self) -> float:
        """The screen connection must be metric on S(TM)."""
        r, m = self.sc.r, self.sc.m
        if m == r:
            return 0.0
        scr = slice(r, m)
        nab_star = np.einsum("abt,tk->abk", self.C[:, scr, r:m], self.fp.FF[r:m])
        res = (
            self.dpair[:, scr, scr]
            - np.einsum("abk,kj,cj->abc", nab_star, self.fp.G, self.fp.X)
            - np.einsum("bk,kj,acj->abc", self.fp.X, self.fp.G, nab_star)
        )
        return float(np.max(np.abs(res), initial=0.0))

    def astar_pairing_residual(self) -> float:
        """g(A*_{E_i} X, PZ) = h^l_i(X, PZ) for screen PZ."""
        r, m = self.sc.r, self.sc.m
        if r == 0 or m == r:
            return 0.0
        lhs = np.einsum("aik,kj,cj->aic", self.A_star, self.fp.G, self.fp.X)
        rhs = self.HL[:, r:m, :].transpose(0, 2, 1)
        return float(np.max(np.abs(lhs - rhs)))

    def second_fundamental(self, a: int, b: int) -> np.ndarray:
        """h(T_a, T_b) as an ambient vector."""
        out = np.zeros(self.sc.n)
        if self.sc.r:
            out += self.HL[a, b] @ self.fp.N
        if self.fp.W.shape[0]:
            out += self.HS[a, b] @ self.fp.W
        return out

    def h_vector(self, xc: np.ndarray, yc: np.ndarray) -> np.ndarray:
        """h(X, Y) for tangent-frame coefficient vectors (bilinearity)."""
        hl = np.einsum("abi,a,b->i", self.HL, xc, yc)
        hs = np.einsum("abi,a,b->i", self.HS, xc, yc)
        out = np.zeros(self.sc.n)
        if self.sc.r:
            out += hl @ self.fp.N
        if self.fp.W.shape[0]:
            out += hs @ self.fp.W
        return out


@dataclass
class GWCoefficients:
    """Gauss-Weingarten data for one (X, Y) pair at one point."""

    hl: np.ndarray        # h^l_i(X, Y)
    hs: np.ndarray        # h^s_alpha(X, Y)
    nabla_tangent: np.ndarray  # induced nab_X Y, ambient components
    A_N: np.ndarray       # (r, n): A_{N_i} X
    A_star: np.ndarray    # (r, n): A*_{E_i} X
    A_W: np.ndarray       # (nw, n): A_{W_alpha} X
    tau: np.ndarray       # tau_ij(X)
    rho: np.ndarray       # rho_{i alpha}(X)
    phi_form: np.ndarray  # phi_{alpha i}(X)
    sigma: np.ndarray     # sigma_{alpha beta}(X)
    hstar: np.ndarray     # h*_i(X, PY)
    lam: np.ndarray       # lambda_i(X)
    reconstruction_residual: float


def gauss_weingarten(sc: SubmanifoldScenario, X: VectorField, Y: VectorField, sp: SamplePoint) -> GWCoefficients:
    """Extract every coefficient for tangent fields X, Y at a sample point.

    h^l/h^s/nab_X Y come from the jets of the given fields; the X-only
    operators and forms are contracted from the frame table (they are
    tensorial in X)."""
    fp = sc.frame_point(sp)
    tab = sc.gw_table(sp)
    p = sp.ambient
    xv = X.value(p)
    yv, yjac = Y.jet1(p)
    xc = fp.tangent_coeffs(xv)
    yc = fp.tangent_coeffs(yv)

    DxY = yjac @ xv + np.einsum("kab,a,b->k", tab.Gamma, xv, yv)
    c = fp.decompose(DxY)
    m, r = sc.m, sc.r
    recon = fp.reconstruction_residual(DxY, c)

    hstar = np.einsum("aib,a,b->i", tab.hstar, xc, yc[r:]) if r else np.zeros(0)
    return GWCoefficients(
        hl=c[m : m + r].copy(),
        hs=c[m + r :].copy(),
        nabla_tangent=fp.tangential(c),
        A_N=np.einsum("aik,a->ik", tab.A_N, xc),
        A_star=np.einsum("aik,a->ik", tab.A_star, xc),
        A_W=np.einsum("aik,a->ik", tab.A_W, xc),
        tau=np.einsum("aij,a->ij", tab.tau, xc),
        rho=np.einsum("aij,a->ij", tab.rho, xc),
        phi_form=np.einsum("aij,a->ij", tab.phi_form, xc),
        sigma=np.einsum("aij,a->ij", tab.sigma, xc),
        hstar=hstar,
        lam=np.einsum("ai,a->i", tab.lam, xc),
        reconstruction_residual=recon,
    )


def second_fundamental(sc: SubmanifoldScenario, X: VectorField, Y: VectorField, sp: SamplePoint) -> np.ndarray:
    """h(X, Y) = sum_i h^l_i N_i + sum_al h^s_al W_al, as an ambient vector."""
    gw = gauss_weingarten(sc, X, Y, sp)
    fp = sc.frame_point(sp)
    out = np.zeros(sc.n)
    if sc.r:
        out += gw.hl @ fp.N
    if fp.W.shape[0]:
        out += gw.hs @ fp.W
    return out
