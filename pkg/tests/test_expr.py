"""Parser, evaluator, and differentiator tests.

The componentwise decompositions of sin, sec, cosh, and exp double as
independent oracles for the complex evaluator: sin(x+iy) must equal
sin x cosh y + i cos x sinh y, and so on.
"""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from realslice import expr as ex

from conftest import random_expr_with_var

# ---------------------------------------------------------------------------
# componentwise decomposition oracles


def sin_parts(x: float, y: float) -> complex:
    return complex(math.sin(x) * math.cosh(y), math.cos(x) * math.sinh(y))


def sec_parts(x: float, y: float) -> complex:
    # sec z = (cos x cosh y + i sin x sinh y) / |cos z|^2, real iff
    # sin x sinh y = 0 with cos x cosh y != 0
    den = (math.cos(x) * math.cosh(y)) ** 2 + (math.sin(x) * math.sinh(y)) ** 2
    return complex(math.cos(x) * math.cosh(y), math.sin(x) * math.sinh(y)) / den


def cosh_parts(x: float, y: float) -> complex:
    return complex(math.cosh(x) * math.cos(y), math.sinh(x) * math.sin(y))


def exp_parts(x: float, y: float) -> complex:
    return math.exp(x) * complex(math.cos(y), math.sin(y))


# ---------------------------------------------------------------------------
# parsing


def test_parse_add_const():
    assert ex.parse("sin(z)+2") == ex.BinOp("+", ex.Fn("sin", ex.Z), ex.Const(2.0))


def test_parse_bare_variable():
    assert ex.parse("z") == ex.Z


def test_parse_named_constant():
    assert ex.parse("2*pi") == ex.BinOp("*", ex.Const(2.0), ex.NamedConst("pi"))


def test_parse_unbalanced_paren_offset():
    with pytest.raises(ex.ParseError) as err:
        ex.parse("sec(z")
    assert err.value.offset == 5


def test_parse_unknown_identifier():
    with pytest.raises(ex.ParseError, match="unknown identifier"):
        ex.parse("foo(z)")


def test_parse_imaginary_literal_rejected():
    with pytest.raises(ex.ParseError, match="imaginary"):
        ex.parse("3*i")
    with pytest.raises(ex.ParseError, match="imaginary"):
        ex.parse("sin(z)+2*j")


def test_parse_nonconstant_exponent_rejected():
    with pytest.raises(ex.ParseError, match="constant"):
        ex.parse("z^z")
    with pytest.raises(ex.ParseError, match="constant"):
        ex.parse("2^sin(z)")


def test_parse_abs_rejected():
    with pytest.raises(ex.ParseError, match="abs"):
        ex.parse("abs(z)")


def test_parse_empty():
    with pytest.raises(ex.ParseError):
        ex.parse("   ")


def test_parse_precedence():
    # ^ binds tighter than unary minus, unary minus tighter than *
    assert ex.parse("-z^2") == ex.Neg(ex.Pow(ex.Z, ex.Const(2.0)))
    assert ex.parse("-z*2") == ex.BinOp("*", ex.Neg(ex.Z), ex.Const(2.0))
    assert ex.parse("2^-3") == ex.Pow(ex.Const(2.0), ex.Neg(ex.Const(3.0)))
    assert ex.parse("1-2-3") == ex.BinOp(
        "-", ex.BinOp("-", ex.Const(1.0), ex.Const(2.0)), ex.Const(3.0)
    )
    assert ex.parse("2^2^3") == ex.Pow(ex.Const(2.0), ex.Pow(ex.Const(2.0), ex.Const(3.0)))
    assert ex.parse("1+2*3") == ex.BinOp(
        "+", ex.Const(1.0), ex.BinOp("*", ex.Const(2.0), ex.Const(3.0))
    )


# ---------------------------------------------------------------------------
# evaluation


def test_eval_sin_at_i_matches_decomposition():
    got = ex.evaluate(ex.parse("sin(z)"), 1j)
    want = sin_parts(0.0, 1.0)  # = i sinh 1
    assert abs(got - want) < 1e-15
    assert abs(got.imag - 1.1752011936438014) < 1e-12
    assert abs(got.real) < 1e-15


def test_eval_sin_at_zero():
    assert ex.evaluate(ex.parse("sin(z)"), 0j) == 0j


def test_eval_square():
    assert ex.evaluate(ex.parse("z^2"), 1 + 1j) == 2j


def test_eval_exp_at_i_pi():
    got = ex.evaluate(ex.parse("exp(z)"), complex(0.0, math.pi))
    assert abs(got - (-1.0)) < 1e-12


@pytest.mark.parametrize(
    "name,parts",
    [("sin", sin_parts), ("sec", sec_parts), ("cosh", cosh_parts), ("exp", exp_parts)],
)
def test_eval_matches_componentwise_decomposition(name, parts):
    e = ex.parse(f"{name}(z)")
    for x in (-2.3, -1.0, -0.4, 0.0, 0.7, 1.9):
        for y in (-2.0, -0.9, 0.0, 0.5, 1.5):
            got = ex.evaluate(e, complex(x, y))
            want = parts(x, y)
            assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


def test_eval_real_inputs_stay_real():
    rng = random.Random(7)
    texts = ["sin(z)", "cos(z)", "tanh(z)", "exp(z)", "z^3 - 2*z", "cosh(z)", "sech(z)"]
    for text in texts:
        e = ex.parse(text)
        for _ in range(20):
            x = rng.uniform(-3, 3)
            v = ex.evaluate(e, complex(x, 0.0))
            assert abs(v.imag) < 1e-14


def test_eval_schwarz_reflection_random():
    rng = random.Random(20260809)
    checked = 0
    while checked < 100:
        e = random_expr_with_var(rng, depth=3)
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        try:
            a = ex.evaluate(e, z.conjugate())
            b = ex.evaluate(e, z)
        except ex.EvalError:
            continue
        if abs(b) < 1e-6:  # relative comparison needs a scale
            continue
        assert abs(a - b.conjugate()) <= 1e-12 * abs(b)
        checked += 1


def test_eval_overflow_cap():
    with pytest.raises(ex.EvalOverflowError):
        ex.evaluate(ex.parse("exp(z)"), complex(50.0, 0.0))
    with pytest.raises(ex.EvalOverflowError):
        ex.evaluate(ex.parse("cosh(z)"), complex(800.0, 0.0))


def test_eval_domain_errors():
    with pytest.raises(ex.EvalDomainError):
        ex.evaluate(ex.parse("ln(z)"), 0j)
    with pytest.raises(ex.EvalDomainError):
        ex.evaluate(ex.parse("1/z"), 0j)


def test_eval_integer_power_of_zero():
    assert ex.evaluate(ex.parse("z^3"), 0j) == 0j
    with pytest.raises(ex.EvalDomainError):
        ex.evaluate(ex.parse("z^-2"), 0j)


def test_eval_noninteger_power():
    got = ex.evaluate(ex.parse("z^0.5"), 4 + 0j)
    assert abs(got - 2.0) < 1e-14
    sq = ex.evaluate(ex.parse("sqrt(z)"), 2j)
    assert abs(sq - ex.evaluate(ex.parse("z^0.5"), 2j)) < 1e-14


def test_eval_vec_agrees_with_scalar():
    import numpy as np

    e = ex.parse("sec(z) + z^2")
    zs = np.array([0.3 + 0.4j, -1.2 + 0.1j, 2.0 - 0.5j, 0.0 + 0.0j])
    vec = ex.eval_vec(e, zs)
    for k, z in enumerate(zs):
        assert abs(vec[k] - ex.evaluate(e, complex(z))) < 1e-12


def test_eval_vec_poisons_errors():
    import numpy as np

    e = ex.parse("1/z")
    vec = ex.eval_vec(e, np.array([0j, 1j]))
    assert np.isnan(vec[0].real) and abs(vec[1] - (-1j)) < 1e-15
    big = ex.eval_vec(ex.parse("exp(z)"), np.array([50.0 + 0j]))
    assert np.isnan(big[0].real)


# ---------------------------------------------------------------------------
# differentiation


def test_derivative_structures():
    ds = ex.differentiate(ex.parse("sin(z)"))
    assert ds == ex.BinOp("*", ex.Fn("cos", ex.Z), ex.Const(1.0))
    assert ex.differentiate(ex.Const(2.0)) == ex.Const(0.0)


def test_derivative_of_exp_at_zero():
    d = ex.differentiate(ex.parse("exp(z)"))
    assert abs(ex.evaluate(d, 0j) - 1.0) < 1e-15


def test_derivative_vs_central_difference():
    rng = random.Random(99)
    h = 1e-6
    checked = 0
    while checked < 50:
        e = random_expr_with_var(rng, depth=3)
        d = ex.differentiate(e)
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        try:
            fd = (ex.evaluate(e, z + h) - ex.evaluate(e, z - h)) / (2 * h)
            sym = ex.evaluate(d, z)
        except ex.EvalError:
            continue
        if abs(sym) < 1e-3 or abs(sym) > 1e6:  # stay away from singular scales
            continue
        assert abs(fd - sym) <= 1e-6 * abs(sym)
        checked += 1


def test_derivative_closed_under_grammar():
    rng = random.Random(4)
    for _ in range(50):
        e = random_expr_with_var(rng, depth=3)
        d = ex.differentiate(e)
        ex.parse(ex.to_text(d))  # derivative prints and re-parses


# ---------------------------------------------------------------------------
# pretty-printer round trip (structural identity on parser-image trees)

_atoms = st.one_of(
    st.just(ex.Z),
    st.builds(
        ex.Const,
        st.floats(min_value=0.0, max_value=1e6, allow_nan=False, allow_infinity=False),
    ),
    st.builds(ex.NamedConst, st.sampled_from(["pi", "e"])),
)

_const_exponents = st.one_of(
    st.builds(ex.Const, st.floats(min_value=0.0, max_value=9.0, allow_nan=False)),
    st.builds(ex.NamedConst, st.sampled_from(["pi", "e"])),
)


def _extend(children):
    return st.one_of(
        st.builds(ex.Neg, children),
        st.builds(ex.Fn, st.sampled_from(ex.FUNCTION_NAMES), children),
        st.builds(
            lambda op, left, right: ex.BinOp(op, left, right),
            st.sampled_from(["+", "-", "*", "/"]),
            children,
            children,
        ),
        st.builds(ex.Pow, children, _const_exponents),
    )


_trees = st.recursive(_atoms, _extend, max_leaves=20)


@settings(deadline=None, max_examples=300)
@given(_trees)
def test_print_parse_round_trip(tree):
    assert ex.parse(ex.to_text(tree)) == tree


@settings(deadline=None, max_examples=300)
@given(st.text(max_size=30))
def test_parse_total(text):
    try:
        ex.parse(text)
    except ex.ParseError:
        pass
