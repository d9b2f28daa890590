import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nullgeo.errors import (
    EvalDomainError,
    ExprSyntaxError,
    UnboundParameterError,
    UnknownSymbolError,
)
from nullgeo.expr import backend_name, eval_jet2, parse
from nullgeo.expr.nodes import Coord, Num, Sub, render

from .conftest import random_expression_text


class TestParse:
    def test_direct_grammar_case(self):
        e = parse("x1 - y4", ["x1", "y4"])
        assert isinstance(e.root, Sub)
        assert e.root.left == Coord("x1", 0)
        assert e.root.right == Coord("y4", 1)

    def test_worked_example_constraint(self):
        e = parse("sin(theta)*x2 + cos(theta)*y2 + z", ["x2", "y2", "z"], ["theta"])
        j = eval_jet2(e, [1.0, 2.0, 3.0], {"theta": 0.5})
        assert j.value == pytest.approx(math.sin(0.5) + 2 * math.cos(0.5) + 3)
        assert e.free_params == {"theta"}

    def test_syntax_error_position(self):
        with pytest.raises(ExprSyntaxError) as exc:
            parse("2*w5 +", ["w5"])
        assert exc.value.position == 7

    def test_unknown_symbol_named(self):
        with pytest.raises(UnknownSymbolError, match="q9"):
            parse("x1 + q9", ["x1"])

    def test_unknown_function(self):
        with pytest.raises(UnknownSymbolError, match="tanh"):
            parse("tanh(x1)", ["x1"])

    def test_empty_input(self):
        with pytest.raises(ExprSyntaxError):
            parse("   ", ["x1"])

    def test_duplicate_names_rejected(self):
        with pytest.raises(ExprSyntaxError):
            parse("x", ["x"], ["x"])

    def test_rational_exponent_forms(self):
        for text in ["x^2", "x^(1/2)", "x^(-2)", "x^(3/2)"]:
            e = parse(text, ["x"])
            assert parse(e.render(), ["x"]).root == e.root

    def test_non_literal_exponent_rejected(self):
        with pytest.raises(ExprSyntaxError):
            parse("x^y", ["x", "y"])
        with pytest.raises(ExprSyntaxError):
            parse("x^2.5", ["x"])

    def test_roundtrip_spec_examples(self):
        samples = [
            ("x5^(1/2)", ["x5"], []),
            ("x2*sin(theta) + y2*cos(theta)", ["x2", "y2"], ["theta"]),
            ("2*y5", ["y5"], []),
            ("-(x1 + y1)/(1 + x1^2)", ["x1", "y1"], []),
        ]
        for text, coords, params in samples:
            e = parse(text, coords, params)
            again = parse(e.render(), coords, params)
            assert again.root == e.root


# hypothesis strategy: random ASTs rendered to text, reparsed, compared
_names = st.sampled_from(["x1", "x2", "y1"])


def _expr_strategy():
    leaves = st.one_of(
        _names,
        st.floats(min_value=0.0, max_value=9.0).map(lambda v: repr(float(np.float64(v)))),
    )

    def extend(children):
        op = st.sampled_from(["+", "-", "*", "neg", "sin", "cos", "exp", "pow2"])
        return st.tuples(op, children, children).map(_combine)

    return st.recursive(leaves, extend, max_leaves=12)


def _combine(t):
    op, a, b = t
    if op in "+-*":
        return f"({a} {op} {b})"
    if op == "neg":
        return f"-({a})"
    if op == "pow2":
        return f"({a})^2"
    return f"{op}({a})"


class TestRoundTrip:
    @settings(max_examples=80, deadline=None)
    @given(_expr_strategy())
    def test_parse_render_roundtrip(self, text):
        coords = ["x1", "x2", "y1"]
        e = parse(text, coords)
        assert parse(e.render(), coords).root == e.root


class TestJets:
    def test_linear(self):
        j = eval_jet2(parse("2*y5", ["y5"]), [3.0])
        assert j.value == 6.0
        assert j.grad[0] == 2.0
        assert j.hess[0, 0] == 0.0

    def test_sqrt_closed_form(self):
        # d/dx sqrt(x) = 1/(2 sqrt x); d2 = -1/(4 x^{3/2})
        j = eval_jet2(parse("sqrt(x5)", ["x5"]), [4.0])
        assert j.value == 2.0
        assert j.grad[0] == pytest.approx(0.25, rel=1e-15)
        assert j.hess[0, 0] == pytest.approx(-1.0 / 32.0, rel=1e-15)

    def test_half_power_equals_sqrt(self):
        a = eval_jet2(parse("x^(1/2)", ["x"]), [1.7])
        b = eval_jet2(parse("sqrt(x)", ["x"]), [1.7])
        assert a.value == pytest.approx(b.value, rel=1e-15)
        assert a.grad[0] == pytest.approx(b.grad[0], rel=1e-14)
        assert a.hess[0, 0] == pytest.approx(b.hess[0, 0], rel=1e-13)

    def test_sqrt_domain_error_at_zero(self):
        with pytest.raises(EvalDomainError, match="sqrt"):
            eval_jet2(parse("sqrt(x5)", ["x5"]), [0.0])

    def test_division_by_zero_names_subexpression(self):
        with pytest.raises(EvalDomainError, match=r"division by zero in '1\.0/x'"):
            eval_jet2(parse("1/x", ["x"]), [0.0])

    def test_unbound_parameter(self):
        e = parse("a*x", ["x"], ["a"])
        with pytest.raises(UnboundParameterError):
            eval_jet2(e, [1.0], {})

    def test_parameters_have_zero_derivatives(self):
        e = parse("a*x + a^2", ["x"], ["a"])
        j = eval_jet2(e, [2.0], {"a": 3.0})
        assert j.value == 15.0
        assert j.grad.tolist() == [3.0]
        assert j.hess.tolist() == [[0.0]]

    def test_sparsity_of_unmentioned_coordinates(self):
        e = parse("sin(x1)*x1^2", ["x1", "x2", "x3"])
        j = eval_jet2(e, [0.7, 5.0, -3.0])
        assert j.grad[1] == 0.0 and j.grad[2] == 0.0
        assert np.all(j.hess[1, :] == 0.0) and np.all(j.hess[:, 2] == 0.0)

    def test_hessian_symmetric_bitwise(self):
        rng = np.random.default_rng(5)
        coords = ["x1", "x2", "y1"]
        for k in range(25):
            text = random_expression_text(rng, coords, [])
            e = parse(text, coords)
            pt = rng.uniform(-2, 2, size=3)
            try:
                j = eval_jet2(e, pt)
            except EvalDomainError:
                continue
            assert np.array_equal(j.hess, j.hess.T)

    def test_deterministic_bit_identical(self):
        coords = ["x1", "x2"]
        e = parse("sin(x1*x2)/(x2^2 + 1.5) + sqrt(x1^2 + 2.0)", coords)
        pt = np.array([0.3, -1.2])
        j1 = eval_jet2(e, pt)
        j2 = eval_jet2(e, pt)
        assert j1.value == j2.value
        assert j1.grad.tobytes() == j2.grad.tobytes()
        assert j1.hess.tobytes() == j2.hess.tobytes()


def finite_difference_gradient(f, x, h=2e-6):
    g = np.zeros(len(x))
    for k in range(len(x)):
        step = h * max(1.0, abs(x[k]))
        xp, xm = x.copy(), x.copy()
        xp[k] += step
        xm[k] -= step
        g[k] = (f(xp) - f(xm)) / (2 * step)
    return g


class TestADAgainstFiniteDifferences:
    def test_gradient_and_hessian_match_fd(self):
        rng = np.random.default_rng(12345)
        coords = ["x1", "x2", "y1"]
        params = ["theta"]
        bindings = {"theta": 0.6}
        checked = 0
        while checked < 200:
            text = random_expression_text(rng, coords, params)
            e = parse(text, coords, params)
            x = rng.uniform(-2, 2, size=3)
            try:
                j = eval_jet2(e, x, bindings)
                if abs(j.value) > 1e6 or np.max(np.abs(j.grad)) > 1e6:
                    continue
                fd_grad = finite_difference_gradient(
                    lambda p: e.jet(p, bindings, order=0)[0], x
                )
                fd_hess = np.array(
                    [
                        finite_difference_gradient(
                            lambda p, kk=k: e.jet(p, bindings, order=1)[1][kk], x, h=1e-5
                        )
                        for k in range(3)
                    ]
                )
            except EvalDomainError:
                continue
            grad_err = np.max(np.abs(j.grad - fd_grad)) / max(np.max(np.abs(fd_grad)), 1.0)
            hess_err = np.max(np.abs(j.hess - fd_hess)) / max(np.max(np.abs(fd_hess)), 1.0)
            assert grad_err < 1e-6, f"{text} at {x}: grad err {grad_err}"
            assert hess_err < 1e-5, f"{text} at {x}: hess err {hess_err}"
            checked += 1


class TestBackends:
    def test_backend_selected(self):
        assert backend_name() in ("compiled", "pure")

    def test_pure_and_compiled_agree(self):
        from nullgeo.expr import _pure

        try:
            from nullgeo.expr import _core
        except ImportError:
            pytest.skip("compiled core not built")
        rng = np.random.default_rng(77)
        coords = ["x1", "x2"]
        for _ in range(40):
            text = random_expression_text(rng, coords, [])
            e = parse(text, coords)
            pt = rng.uniform(-2, 2, size=2)
            pr = np.zeros(1)
            try:
                v1, g1, h1 = _pure.eval_tape(e._tape, pt, pr, 2)
            except EvalDomainError:
                continue
            v2, g2, h2 = _core.eval_tape(e._tape, pt, pr, 2)
            assert v1 == pytest.approx(v2, rel=1e-14, abs=1e-14)
            np.testing.assert_allclose(g1, g2, rtol=1e-13, atol=1e-13)
            np.testing.assert_allclose(h1, h2, rtol=1e-12, atol=1e-12)

    def test_domain_errors_match(self):
        from nullgeo.expr import _pure

        try:
            from nullgeo.expr import _core
        except ImportError:
            pytest.skip("compiled core not built")
        e = parse("sqrt(x)", ["x"])
        for impl in (_pure, _core):
            with pytest.raises(EvalDomainError):
                impl.eval_tape(e._tape, np.array([-1.0]), np.zeros(1), 2)


def test_render_of_numbers_roundtrips():
    node = Num(0.1 + 0.2)
    assert parse(render(node), []).root == node
