"""Almost contact metric structures and the nearly cosymplectic identities.

All checks are pointwise: the structure tensor phi, the Reeb field xi and the
one-form eta are fields of expressions, and each identity is evaluated from
their jets.  ``VecJet`` carries (values, spatial Jacobian) for composite
fields such as phi(Y), which is what lets second-layer derivatives like
(nab_X phi)(phi Y) be computed without symbolic algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import Expression
from .geometry import (
    MetricField,
    OneForm,
    VectorField,
    christoffel,
    cov_deriv_values,
    lie_bracket_values,
)


@dataclass
class VecJet:
    """Evaluated field: components and spatial Jacobian at one point."""

    vals: np.ndarray
    jac: np.ndarray  # jac[k, a] = d_a V^k


def vecjet(field: VectorField, p) -> VecJet:
    vals, jac = field.jet1(p)
    return VecJet(vals, jac)


@dataclass(frozen=True)
class AlmostContactStructure:
    """(phi, xi, eta) over a chart; validity against (equa-style) axioms is
    established by :func:`verify_acms`, never assumed."""

    phi: tuple[tuple[Expression, ...], ...]  # phi[k][j]: component k of phi(e_j)
    xi: VectorField
    eta: OneForm
    bindings: dict | None = None

    def __post_init__(self):
        object.__setattr__(
            self,
            "_arrays",
            tuple(tuple(c.bind(self.bindings) for c in row) for row in self.phi),
        )

    @property
    def dim(self) -> int:
        return len(self.phi)

    def phi_value(self, p) -> np.ndarray:
        n = self.dim
        Phi = np.zeros((n, n))
        for k in range(n):
            for j in range(n):
                Phi[k, j] = self.phi[k][j].jet(p, self._arrays[k][j], order=0)[0]
        return Phi

    def phi_jet1(self, p):
        """(Phi, dPhi) with ``dPhi[a, k, j] = d_a phi^k_j``."""
        n = self.dim
        Phi = np.zeros((n, n))
        dPhi = np.zeros((n, n, n))
        for k in range(n):
            for j in range(n):
                v, g, _ = self.phi[k][j].jet(p, self._arrays[k][j], order=1)
                Phi[k, j] = v
                dPhi[:, k, j] = g
        return Phi, dPhi


@dataclass
class ContactPointData:
    """Per-point cache shared by the identity checks."""

    G: np.ndarray
    Gamma: np.ndarray
    Phi: np.ndarray
    dPhi: np.ndarray
    xi: VecJet
    eta_vals: np.ndarray
    eta_jac: np.ndarray
    H: np.ndarray  # H[k, a]: component k of H(e_a)

    def pair(self, u, v) -> float:
        return float(u @ self.G @ v)

    def eta_of(self, v) -> float:
        return float(self.eta_vals @ v)

    def phi_of(self, v) -> np.ndarray:
        return self.Phi @ v

    def h_of(self, v) -> np.ndarray:
        return self.H @ v


def contact_point(s: AlmostContactStructure, g: MetricField, p) -> ContactPointData:
    Gamma = christoffel(g, p)
    Phi, dPhi = s.phi_jet1(p)
    xi = vecjet(s.xi, p)
    eta_vals, eta_jac = s.eta.jet1(p)
    # H X = -nab_X xi, as a matrix over the coordinate frame
    H = -(xi.jac + np.einsum("kab,b->ka", Gamma, xi.vals))
    return ContactPointData(
        G=g.value(p), Gamma=Gamma, Phi=Phi, dPhi=dPhi, xi=xi,
        eta_vals=eta_vals, eta_jac=eta_jac, H=H,
    )


def h_operator(s: AlmostContactStructure, g: MetricField, p) -> np.ndarray:
    """Matrix of H (``H X = -nab_X xi``) over the coordinate frame."""
    return contact_point(s, g, p).H


def phi_apply_jet(pd: ContactPointData, V: VecJet) -> VecJet:
    """phi(V) as a field jet: product rule over phi's own derivatives."""
    vals = pd.Phi @ V.vals
    jac = np.einsum("akj,j->ka", pd.dPhi, V.vals) + pd.Phi @ V.jac
    return VecJet(vals, jac)


def cov_deriv_jet(pd: ContactPointData, xv: np.ndarray, V: VecJet) -> np.ndarray:
    return cov_deriv_values(pd.Gamma, xv, V.vals, V.jac)


def nabla_phi_values(pd: ContactPointData, xv: np.ndarray, Y: VecJet) -> np.ndarray:
    """(nab_X phi)Y = nab_X(phi Y) - phi(nab_X Y), pointwise."""
    phiY = phi_apply_jet(pd, Y)
    return cov_deriv_jet(pd, xv, phiY) - pd.Phi @ cov_deriv_jet(pd, xv, Y)


def nabla_phi(s: AlmostContactStructure, g: MetricField, X: VectorField, Y: VectorField, p) -> np.ndarray:
    pd = contact_point(s, g, p)
    return nabla_phi_values(pd, X.value(p), vecjet(Y, p))


def acms_axiom_residuals(s: AlmostContactStructure, g: MetricField, p) -> dict[str, float]:
    """Residuals of the structure axioms at one point, one entry per axiom."""
    pd = contact_point(s, g, p)
    n = s.dim
    Phi, G = pd.Phi, pd.G
    eta = pd.eta_vals
    xiv = pd.xi.vals
    res = {
        "phi_square": float(np.max(np.abs(Phi @ Phi + np.eye(n) - np.outer(xiv, eta)))),
        "eta_xi": abs(pd.eta_of(xiv) - 1.0),
        "eta_phi": float(np.max(np.abs(eta @ Phi))),
        "phi_xi": float(np.max(np.abs(Phi @ xiv))),
        "compat": float(np.max(np.abs(Phi.T @ G @ Phi - G + np.outer(eta, eta)))),
        "eta_metric": float(np.max(np.abs(G @ xiv - eta))),
    }
    return res


def verify_acms(s: AlmostContactStructure, g: MetricField, points, tol: float):
    """One (axiom, point) record per check; see runner for CheckRecord wiring."""
    if s.dim % 2 != 1:
        raise ValueError(f"almost contact structures need odd dimension, got {s.dim}")
    if s.dim != g.dim:
        raise ValueError(f"structure dimension {s.dim} != metric dimension {g.dim}")
    out = []
    for idx, p in enumerate(points):
        for name, r in acms_axiom_residuals(s, g, p).items():
            out.append((f"acms.{name}", idx, r, tol))
    return out


def h_property_residuals(pd: ContactPointData) -> dict[str, float]:
    """The H-operator properties that hold on nearly cosymplectic structures."""
    G, H, Phi = pd.G, pd.H, pd.Phi
    skew = G @ H  # gbar(HX, Y) = (G H)_yx; skew-adjointness <=> G H antisymmetric
    return {
        "h_skew": float(np.max(np.abs(skew + skew.T))),
        "h_xi": float(np.max(np.abs(H @ pd.xi.vals))),
        "h_eta": float(np.max(np.abs(pd.eta_vals @ H))),
        "h_phi_anticommute": float(np.max(np.abs(H @ Phi + Phi @ H))),
    }


def nearly_cosymplectic_residual(
    s: AlmostContactStructure, g: MetricField, points, fields: list[VectorField]
):
    """max_k |((nab_X phi)Y + (nab_Y phi)X)^k| over the given field pairs.

    Returns (worst, records); records are (pair label, point index, residual).
    """
    records = []
    worst = 0.0
    for idx, p in enumerate(points):
        pd = contact_point(s, g, p)
        jets = [vecjet(f, p) for f in fields]
        for a in range(len(fields)):
            for b in range(a, len(fields)):
                r = float(
                    np.max(
                        np.abs(
                            nabla_phi_values(pd, jets[a].vals, jets[b])
                            + nabla_phi_values(pd, jets[b].vals, jets[a])
                        )
                    )
                )
                records.append((f"pair{a}_{b}", idx, r))
                worst = max(worst, r)
    return worst, records


def d_eta_values(pd: ContactPointData, X: VecJet, Y: VecJet) -> float:
    """dη(X,Y) = (X(η(Y)) − Y(η(X)) − η([X,Y])) / 2  (half convention: this is
    the normalisation under which dη(X,Y) = gbar(X, H Y) holds exactly)."""
    # directional derivative of the scalar field eta(Y) along X
    d_eta_y = X.vals @ (pd.eta_jac.T @ Y.vals + pd.eta_vals @ Y.jac)
    d_eta_x = Y.vals @ (pd.eta_jac.T @ X.vals + pd.eta_vals @ X.jac)
    bracket = lie_bracket_values(X.vals, X.jac, Y.vals, Y.jac)
    return 0.5 * float(d_eta_y - d_eta_x - pd.eta_of(bracket))


def d_eta(s: AlmostContactStructure, g: MetricField, X: VectorField, Y: VectorField, p) -> float:
    pd = contact_point(s, g, p)
    return d_eta_values(pd, vecjet(X, p), vecjet(Y, p))


def d_eta_relation_residual(pd: ContactPointData, X: VecJet, Y: VecJet) -> float:
    """|dη(X,Y) − gbar(X, H Y)|, exact on nearly cosymplectic structures."""
    return abs(d_eta_values(pd, X, Y) - pd.pair(X.vals, pd.h_of(Y.vals)))


def omega(s: AlmostContactStructure, g: MetricField, X: VectorField, Y: VectorField, p) -> float:
    """Fundamental 2-form Omega(X, Y) = gbar(X, phi Y); exposed for reporting."""
    pd = contact_point(s, g, p)
    return pd.pair(X.value(p), pd.phi_of(Y.value(p)))


def nabla_phi_skew_residual(pd: ContactPointData, Z: VecJet, X: VecJet, Y: VecJet) -> float:
    """|gbar((nab_Z phi)X, Y) + gbar(X, (nab_Z phi)Y)|."""
    a = pd.pair(nabla_phi_values(pd, Z.vals, X), Y.vals)
    b = pd.pair(X.vals, nabla_phi_values(pd, Z.vals, Y))
    return abs(a + b)


def phi_derivative_compose_residuals(pd: ContactPointData, X: VecJet, Y: VecJet):
    """Residual vectors of the two composition identities that tie
    (nab phi) ∘ phi to H on nearly cosymplectic structures:

        (nab_X phi)(phi Y) = -phi (nab_X phi)Y - gbar(Y, H X) xi - eta(Y) H X
        (nab_{phi X} phi)(phi Y) = -(nab_X phi)Y - eta(X) phi H Y + eta(Y) phi H X
    """
    phiY = phi_apply_jet(pd, Y)
    hX = pd.h_of(X.vals)
    hY = pd.h_of(Y.vals)

    lhs1 = nabla_phi_values(pd, X.vals, phiY)
    rhs1 = (
        -pd.phi_of(nabla_phi_values(pd, X.vals, Y))
        - pd.pair(Y.vals, hX) * pd.xi.vals
        - pd.eta_of(Y.vals) * hX
    )

    phiXv = pd.phi_of(X.vals)
    lhs2 = nabla_phi_values(pd, phiXv, phiY)
    rhs2 = (
        -nabla_phi_values(pd, X.vals, Y)
        - pd.eta_of(X.vals) * pd.phi_of(hY)
        + pd.eta_of(Y.vals) * pd.phi_of(hX)
    )
    return lhs1 - rhs1, lhs2 - rhs2


def phi_derivative_compose_check(
    s: AlmostContactStructure, g: MetricField, points, fields: list[VectorField]
):
    """Worst residuals of the two composition identities over field pairs."""
    worst1 = worst2 = 0.0
    for p in points:
        pd = contact_point(s, g, p)
        jets = [vecjet(f, p) for f in fields]
        for X in jets:
            for Y in jets:
                r1, r2 = phi_derivative_compose_residuals(pd, X, Y)
                worst1 = max(worst1, float(np.max(np.abs(r1))))
                worst2 = max(worst2, float(np.max(np.abs(r2))))
    return worst1, worst2
