import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _exprgen import corpus
from rotsurf.exprparse import (
    MAX_DEPTH,
    BinOp,
    Call,
    Const,
    Neg,
    Num,
    ParseError,
    Var,
    eval_jet,
    eval_scalar,
    parse,
    to_source,
    variables,
)
from rotsurf.jet import DomainError, var_u, var_v

U = Var("u")


@pytest.mark.parametrize(
    "src, tree",
    [
        ("-u^2", Neg(BinOp("^", U, Num(2.0)))),
        ("2^3^2", BinOp("^", Num(2.0), BinOp("^", Num(3.0), Num(2.0)))),
        ("u^-2", BinOp("^", U, Neg(Num(2.0)))),
        ("1 - u - 2", BinOp("-", BinOp("-", Num(1.0), U), Num(2.0))),
        ("u / 2 * 3", BinOp("*", BinOp("/", U, Num(2.0)), Num(3.0))),
        ("1 + 2 * u", BinOp("+", Num(1.0), BinOp("*", Num(2.0), U))),
        ("sin(pi*u)", Call("sin", BinOp("*", Const("pi"), U))),
        ("(1+u)^2", BinOp("^", BinOp("+", Num(1.0), U), Num(2.0))),
        ("−u", Neg(U)),
        (".5e1", Num(5.0)),
    ],
)
def test_precedence_and_associativity(src, tree):
    assert parse(src) == tree


@pytest.mark.parametrize("src, value", [("-2^2", -4.0), ("2^3^2", 512.0), ("(-2)^2", 4.0), ("8/2/2", 2.0)])
def test_values(src, value):
    assert eval_scalar(parse(src), 0.0) == value


@pytest.mark.parametrize(
    "src, offset",
    [
        ("sin(", 4),
        ("exp(0.3*w)", 8),
        ("2 u", 2),
        ("u +", 3),
        ("sin u", 4),
        ("u(2)", 1),
        ("sin(u, 2)", 5),
        ("(u", 2),
        ("u)", 1),
        ("u $ 2", 2),
        ("foo(u)", 0),
        ("1e999", 0),
        ("", 0),
        ("−u + w", 7),  # byte offsets: the minus sign is three bytes
    ],
)
def test_error_offsets(src, offset):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert info.value.offset == offset


def test_unknown_identifier_message():
    with pytest.raises(ParseError, match="unknown identifier 'w' at offset 8"):
        parse("exp(0.3*w)")


def test_variable_set_is_enforced():
    assert variables(parse("u*v", ("u", "v"))) == {"u", "v"}
    with pytest.raises(ParseError):
        parse("u*v")


def test_depth_limit():
    parse("(" * (MAX_DEPTH - 1) + "u" + ")" * (MAX_DEPTH - 1))
    with pytest.raises(ParseError):
        parse("(" * 5000 + "u" + ")" * 5000)
    with pytest.raises(ParseError):
        parse("-" * 5000 + "u")


def test_eval_jet_matches_scalar_and_offsets():
    node = parse("u^2*v + sin(v)", ("u", "v"))
    j = eval_jet(node, var_u(0.4), var_v(1.1))
    assert math.isclose(j.val, eval_scalar(node, 0.4, 1.1), rel_tol=1e-15)
    assert math.isclose(j.du, 2 * 0.4 * 1.1)
    assert math.isclose(j.dvv, -math.sin(1.1))
    with pytest.raises(DomainError) as info:
        eval_jet(parse("1 + log(u - 2)"), var_u(1.0))
    assert info.value.offset == 4


@pytest.mark.parametrize("src", corpus(300, seed=11))
def test_round_trip_corpus(src):
    tree = parse(src, ("u", "v"))
    printed = to_source(tree)
    assert parse(printed, ("u", "v")) == tree
    # printing is a fixed point after one pass
    assert to_source(parse(printed, ("u", "v"))) == printed


_ALPHABET = list("uv0123456789.eE+-*/^() ,") + ["sin", "cos", "log", "sqrt", "pi", "exp", "tan", "−", "x", "$"]


@given(st.lists(st.sampled_from(_ALPHABET), max_size=60).map("".join))
@settings(max_examples=500)
def test_fuzz_never_crashes(src):
    try:
        tree = parse(src, ("u", "v"))
    except ParseError as exc:
        assert 0 <= exc.offset <= len(src.encode("utf-8"))
        return
    assert parse(to_source(tree), ("u", "v")) == tree


@given(st.text(max_size=200))
@settings(max_examples=300)
def test_fuzz_arbitrary_text(src):
    try:
        parse(src, ("u", "v"))
    except ParseError:
        pass
