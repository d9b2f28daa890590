import copy
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nullgeo.nullsub import sample_points, span_residual
from nullgeo.qgcr import (
    mutual_span_residual,
    verify_ascreen,
    verify_qgcr,
    xi_decompose,
    xi_pairing_check,
)
from nullgeo.scenario import build_scenario

from .conftest import plane_slice_doc

_scale = st.floats(min_value=0.01, max_value=100.0).flatmap(
    lambda m: st.sampled_from([m, -m])
)


class TestSpanMembership:
    """Properties of the least-squares membership primitive behind every
    distribution verdict."""

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10 ** 6), _scale, _scale)
    def test_scale_invariant(self, seed, s_basis, s_vec):
        rng = np.random.default_rng(seed)
        basis = rng.normal(size=(3, 8))
        inside = rng.normal(size=3) @ basis
        outside = inside + rng.normal(size=8) * 2.0
        for v, member in ((inside, True), (outside, None)):
            base = span_residual(v[None, :], basis)
            scaled = span_residual((s_vec * v)[None, :], s_basis * basis)
            if member:
                assert base < 1e-10 and scaled < 1e-10
            else:
                # verdict against any threshold in the working range agrees
                assert (base < 1e-8) == (scaled < 1e-8)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_mutual_residual_symmetric_in_span(self, seed):
        rng = np.random.default_rng(seed)
        basis = rng.normal(size=(3, 7))
        mix = rng.normal(size=(3, 3)) + 4 * np.eye(3)
        assert mutual_span_residual(mix @ basis, basis) < 1e-8


class TestVerifyQGCR:
    def test_worked_example_passes_with_dims(self, builtin_sc):
        for sp in sample_points(builtin_sc, 5, 42):
            v = verify_qgcr(builtin_sc, sp)
            assert v.passes()
            assert v.image_spans < 1e-10
            assert v.proper and v.dim_bounds_ok
            assert v.dims == (3, 2, 1, 2, 7, 11)

    def test_stable_across_points_and_seeds(self, builtin_sc):
        for seed in (1, 7, 99):
            for sp in sample_points(builtin_sc, 7, seed):
                assert verify_qgcr(builtin_sc, sp).passes()

    def test_swapped_roles_fail_d1_invariance(self, builtin_doc):
        doc = copy.deepcopy(builtin_doc)
        doc["submanifold"]["qgcr"]["d1"] = [2]
        doc["submanifold"]["qgcr"]["d2"] = [0, 1]
        sc = build_scenario(doc)
        sp = sample_points(sc, 1, 42)[0]
        v = verify_qgcr(sc, sp)
        # phi E3 = -X2 is not in span{E3}
        assert v.d1_invariant > 0.5
        assert not v.passes()

    def test_empty_d0_not_proper(self, builtin_doc):
        doc = copy.deepcopy(builtin_doc)
        doc["submanifold"]["qgcr"]["d0"] = []
        sc = build_scenario(doc)
        sp = sample_points(sc, 1, 42)[0]
        v = verify_qgcr(sc, sp)
        assert not v.proper

    def test_scale_invariance_of_membership(self, builtin_doc):
        # rescaling a radical field (with the paired ltr field compensated)
        # leaves every span-membership verdict unchanged
        doc = copy.deepcopy(builtin_doc)
        fr = doc["submanifold"]["frames"]
        fr["rad"][0] = [f"3*({s})" for s in fr["rad"][0]]
        fr["ltr"][0] = [f"({s})/3" for s in fr["ltr"][0]]
        sc = build_scenario(doc)
        sp = sample_points(sc, 1, 42)[0]
        v = verify_qgcr(sc, sp)
        assert v.passes()
        assert v.proper


class TestXiDecompose:
    def test_worked_example_coefficients(self, builtin_sc):
        for sp in sample_points(builtin_sc, 5, 42):
            d = xi_decompose(builtin_sc, sp)
            # xi = (1/2) E3 + N3: coefficient of E_i is eta(N_i)
            np.testing.assert_allclose(d.a, [0.0, 0.0, 0.5], atol=1e-14)
            np.testing.assert_allclose(d.b, [0.0, 0.0, 1.0], atol=1e-14)
            np.testing.assert_allclose(d.c, [0.0], atol=1e-14)
            assert np.max(np.abs(d.xi_screen)) < 1e-14
            assert d.reconstruction_residual < 1e-10

    def test_riemannian_chart_all_screen(self, plane_sc):
        # xi = dz is tangent to {x = 0} and lies entirely in the screen part
        sp = sample_points(plane_sc, 1, 5)[0]
        d = xi_decompose(plane_sc, sp)
        assert d.a.size == 0 and d.b.size == 0
        np.testing.assert_allclose(d.c, [0.0], atol=1e-15)
        np.testing.assert_allclose(d.xi_screen, [0.0, 1.0], atol=1e-15)
        assert d.reconstruction_residual < 1e-12

    def test_theta_override_keeps_decomposition(self, builtin_doc):
        sc = build_scenario(builtin_doc, {"theta": 1.1})
        sp = sample_points(sc, 1, 42)[0]
        d = xi_decompose(sc, sp)
        assert d.a[2] == pytest.approx(0.5, abs=1e-14)
        assert d.b[2] == pytest.approx(1.0, abs=1e-14)


class TestAscreen:
    def test_worked_example_all_three_conditions(self, builtin_sc):
        for sp in sample_points(builtin_sc, 5, 42):
            a = verify_ascreen(builtin_sc, sp)
            assert a.xi_rad_ltr < 1e-12
            assert a.xi_in_d2_l < 1e-10
            assert a.phi_l_eq_phi_d2 is not None and a.phi_l_eq_phi_d2 < 1e-12
            assert a.reconstruction < 1e-12

    def test_phi_images_span_equality(self, builtin_sc):
        # phi N3 = (1/2) X2 and phi E3 = -X2 individually
        sp = sample_points(builtin_sc, 1, 42)[0]
        fp = builtin_sc.frame_point(sp)
        pd = builtin_sc.contact_point(sp.ambient)
        phiN3 = pd.phi_of(fp.N[2])
        phiE3 = pd.phi_of(fp.E[2])
        np.testing.assert_allclose(phiN3, 0.5 * fp.X[1], atol=1e-14)
        np.testing.assert_allclose(phiE3, -fp.X[1], atol=1e-14)
        assert mutual_span_residual(phiN3[None, :], phiE3[None, :]) < 1e-14

    def test_xi_with_transversal_component_fails(self):
        # M = {z = 0} in flat R^3: xi = dz sits entirely in S(TM-perp)
        doc = plane_slice_doc()
        doc["name"] = "xi-transversal"
        doc["submanifold"]["param_map"] = {"x": "v", "y": "w", "z": "0"}
        doc["submanifold"]["frames"]["screen"] = [["1", "0", "0"], ["0", "1", "0"]]
        doc["submanifold"]["frames"]["stransversal"] = [["0", "0", "1"]]
        doc["submanifold"]["qgcr"] = {
            "d1": [], "d2": [], "d0": [0, 1], "phi_d2": [],
            "L": [], "S": [0], "phi_L": [], "phi_S": [],
        }
        sc = build_scenario(doc)
        sp = sample_points(sc, 1, 3)[0]
        a = verify_ascreen(sc, sp)
        assert a.xi_rad_ltr == pytest.approx(1.0, abs=1e-14)  # c-coefficient is 1


class TestXiPairing:
    def test_worked_example_product_is_one(self, builtin_sc):
        for sp in sample_points(builtin_sc, 5, 42):
            res = xi_pairing_check(builtin_sc, sp)
            assert res.skipped is None
            assert res.value == pytest.approx(1.0, abs=1e-14)
            assert res.residual < 1e-10

    def test_invariant_under_radical_rescaling(self, builtin_doc):
        # E3 -> E3/2 and N3 -> 2 N3 keeps the delta-pairing and the product
        doc = copy.deepcopy(builtin_doc)
        fr = doc["submanifold"]["frames"]
        fr["rad"][2] = [f"({s})/2" for s in fr["rad"][2]]
        fr["ltr"][2] = [f"2*({s})" for s in fr["ltr"][2]]
        sc = build_scenario(doc)
        sp = sample_points(sc, 1, 42)[0]
        fp = sc.frame_point(sp)
        assert np.abs(fp.E @ fp.G @ fp.N.T - np.eye(3)).max() < 1e-14
        res = xi_pairing_check(sc, sp)
        assert res.value == pytest.approx(1.0, abs=1e-13)

    def test_non_ascreen_skipped(self):
        doc = plane_slice_doc()
        doc["submanifold"]["param_map"] = {"x": "v", "y": "w", "z": "0"}
        doc["submanifold"]["frames"]["screen"] = [["1", "0", "0"], ["0", "1", "0"]]
        doc["submanifold"]["frames"]["stransversal"] = [["0", "0", "1"]]
        doc["submanifold"]["qgcr"] = {
            "d1": [], "d2": [], "d0": [0, 1], "phi_d2": [],
            "L": [], "S": [0], "phi_L": [], "phi_S": [],
        }
        sc = build_scenario(doc)
        sp = sample_points(sc, 1, 3)[0]
        assert xi_pairing_check(sc, sp).skipped is not None

    def test_unit_xi_forces_product(self, builtin_sc):
        # gbar(xi, xi) = 1 at every sample (consistency backing the check)
        for sp in sample_points(builtin_sc, 3, 42):
            pd = builtin_sc.contact_point(sp.ambient)
            assert pd.pair(pd.xi.vals, pd.xi.vals) == pytest.approx(1.0, abs=1e-14)
