"""Semi-Riemannian metric fields and pointwise tensor calculus.

Everything here is a pure function of jets evaluated at a single chart point:
metric pairings, Lie brackets, Christoffel symbols assembled from first
metric derivatives, covariant derivatives, and the covariant curvature
tensor assembled from second metric derivatives.

Curvature convention, fixed once for the whole package::

    R(X, Y)Z = nab_X nab_Y Z - nab_Y nab_X Z - nab_[X,Y] Z
    riemann(g, X, Y, Z, V, p) = gbar(R(X, Y)Z, V)

so on the round 2-sphere ``diag(1, sin(u)^2)`` one gets
``riemann(g, du, dv, dv, du) = sin(u)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMetricError
from .expr import Expression, parse

CONDITION_LIMIT = 1e10


@dataclass(frozen=True)
class VectorField:
    """Contravariant field: one component expression per chart coordinate."""

    components: tuple[Expression, ...]
    bindings: dict | None = None

    def __post_init__(self):
        n = len(self.components[0].free_coords)
        if len(self.components) != n:
            raise ValueError(
                f"{len(self.components)} components on a {n}-dimensional chart"
            )
        object.__setattr__(
            self, "_arrays", tuple(c.bind(self.bindings) for c in self.components)
        )

    @property
    def dim(self) -> int:
        return len(self.components)

    def value(self, p) -> np.ndarray:
        return np.array(
            [c.jet(p, a, order=0)[0] for c, a in zip(self.components, self._arrays)]
        )

    def jet1(self, p):
        """Values and spatial Jacobian ``jac[k, a] = d_a V^k``."""
        vals = np.zeros(self.dim)
        jac = np.zeros((self.dim, self.dim))
        for k, (c, a) in enumerate(zip(self.components, self._arrays)):
            v, g, _ = c.jet(p, a, order=1)
            vals[k] = v
            jac[k] = g
        return vals, jac


class OneForm(VectorField):
    """Covariant field; same storage, kept as a distinct type for clarity."""


@dataclass(frozen=True)
class MetricField:
    """Symmetric matrix of component expressions with a declared signature.

    ``signature`` is (#negative, #positive) eigenvalues; nondegeneracy and
    constant index are check targets, not assumptions.
    """

    components: tuple[tuple[Expression, ...], ...]
    signature: tuple[int, int]
    bindings: dict | None = None

    def __post_init__(self):
        object.__setattr__(
            self,
            "_arrays",
            tuple(tuple(c.bind(self.bindings) for c in row) for row in self.components),
        )

    @property
    def dim(self) -> int:
        return len(self.components)

    def value(self, p) -> np.ndarray:
        n = self.dim
        G = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                G[i, j] = self.components[i][j].jet(p, self._arrays[i][j], order=0)[0]
        return G

    def jet1(self, p):
        """(G, dG) with ``dG[k, i, j] = d_k g_ij``."""
        n = self.dim
        G = np.zeros((n, n))
        dG = np.zeros((n, n, n))
        for i in range(n):
            for j in range(n):
                v, g, _ = self.components[i][j].jet(p, self._arrays[i][j], order=1)
                G[i, j] = v
                dG[:, i, j] = g
        return G, dG

    def jet2(self, p):
        """(G, dG, d2G) with ``d2G[k, l, i, j] = d_k d_l g_ij``."""
        n = self.dim
        G = np.zeros((n, n))
        dG = np.zeros((n, n, n))
        d2G = np.zeros((n, n, n, n))
        for i in range(n):
            for j in range(n):
                v, g, h = self.components[i][j].jet(p, self._arrays[i][j], order=2)
                G[i, j] = v
                dG[:, i, j] = g
                d2G[:, :, i, j] = h
        return G, dG, d2G

    def symmetry_residual(self, p) -> float:
        G = self.value(p)
        return float(np.max(np.abs(G - G.T)))

    def signature_at(self, p) -> tuple[int, int]:
        G = self.value(p)
        ev = np.linalg.eigvalsh(0.5 * (G + G.T))
        neg = int(np.sum(ev < 0))
        pos = int(np.sum(ev > 0))
        return neg, pos

    def inverse(self, G: np.ndarray) -> np.ndarray:
        svals = np.linalg.svd(G, compute_uv=False)
        if svals[-1] == 0.0 or svals[0] / svals[-1] > CONDITION_LIMIT:
            cond = np.inf if svals[-1] == 0.0 else svals[0] / svals[-1]
            raise SingularMetricError(float(cond))
        return np.linalg.inv(G)


def constant_vector(values, coords) -> VectorField:
    """Convenience constructor for constant-component fields."""
    return VectorField(tuple(parse(repr(float(v)), coords) for v in values))


def metric_pair(g: MetricField, X: VectorField, Y: VectorField, p) -> float:
    """gbar(X, Y) at p."""
    return float(X.value(p) @ g.value(p) @ Y.value(p))


def pair_values(G: np.ndarray, xv: np.ndarray, yv: np.ndarray) -> float:
    return float(xv @ G @ yv)


def lie_bracket(X: VectorField, Y: VectorField, p) -> np.ndarray:
    """[X, Y]^k = X(Y^k) - Y(X^k), from jets."""
    xv, xjac = X.jet1(p)
    yv, yjac = Y.jet1(p)
    return yjac @ xv - xjac @ yv


def lie_bracket_values(xv, xjac, yv, yjac) -> np.ndarray:
    return yjac @ xv - xjac @ yv


def christoffel(g: MetricField, p) -> np.ndarray:
    """Levi-Civita symbols ``Gamma[k, i, j]``, symmetric in (i, j)."""
    G, dG = g.jet1(p)
    Ginv = g.inverse(G)
    # C[m,i,j] = d_i g_mj + d_j g_mi - d_m g_ij
    C = np.einsum("imj->mij", dG) + np.einsum("jmi->mij", dG) - dG
    return 0.5 * np.einsum("km,mij->kij", Ginv, C)


def christoffel_jet(g: MetricField, p):
    """(Gamma, dGamma) with ``dGamma[l, k, i, j] = d_l Gamma^k_ij``."""
    G, dG, d2G = g.jet2(p)
    Ginv = g.inverse(G)
    C = np.einsum("imj->mij", dG) + np.einsum("jmi->mij", dG) - dG
    Gamma = 0.5 * np.einsum("km,mij->kij", Ginv, C)
    # d_l g^{km} = -g^{ka} (d_l g_ab) g^{bm}
    dGinv = -np.einsum("ka,lab,bm->lkm", Ginv, dG, Ginv)
    dC = (
        np.einsum("limj->lmij", d2G)
        + np.einsum("ljmi->lmij", d2G)
        - np.einsum("lmij->lmij", d2G)
    )
    dGamma = 0.5 * (
        np.einsum("lkm,mij->lkij", dGinv, C) + np.einsum("km,lmij->lkij", Ginv, dC)
    )
    return Gamma, dGamma


def cov_deriv(g: MetricField, X: VectorField, Y: VectorField, p) -> np.ndarray:
    """Ambient covariant derivative (nab_X Y)^k at p."""
    Gamma = christoffel(g, p)
    xv = X.value(p)
    yv, yjac = Y.jet1(p)
    return cov_deriv_values(Gamma, xv, yv, yjac)


def cov_deriv_values(Gamma, xv, yv, yjac) -> np.ndarray:
    return yjac @ xv + np.einsum("kab,a,b->k", Gamma, xv, yv)


def riemann_tensor(g: MetricField, p) -> np.ndarray:
    """Covariant curvature ``R4[i, j, k, l] = gbar(R(e_i, e_j) e_k, e_l)``."""
    G, _, _ = g.jet2(p)
    Gamma, dGamma = christoffel_jet(g, p)
    # R^m_kij = d_i Gamma^m_jk - d_j Gamma^m_ik + Gamma^m_ia Gamma^a_jk - Gamma^m_ja Gamma^a_ik
    Rup = (
        np.einsum("imjk->mkij", dGamma)
        - np.einsum("jmik->mkij", dGamma)
        + np.einsum("mia,ajk->mkij", Gamma, Gamma)
        - np.einsum("mja,aik->mkij", Gamma, Gamma)
    )
    return np.einsum("mkij,ml->ijkl", Rup, G)


def riemann(g: MetricField, X, Y, Z, V, p) -> float:
    """gbar(R(X, Y)Z, V) at p; curvature is tensorial, so only field values
    enter."""
    R4 = riemann_tensor(g, p)
    return riemann_values(R4, X.value(p), Y.value(p), Z.value(p), V.value(p))


def riemann_values(R4, xv, yv, zv, vv) -> float:
    return float(np.einsum("ijkl,i,j,k,l->", R4, xv, yv, zv, vv))
