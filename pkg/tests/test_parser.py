"""Parser and printer tests.

Truth sources: expected ASTs are hand-built from the grammar
([DERIVED], written before running the parser on each input);
round-trip and error cases are [TRIVIAL] properties of the interface.
"""

import pytest

from seqsolve.ast import (
    And,
    BoolLit,
    Formula,
    IAdd,
    IConst,
    IOfSeq,
    IOne,
    ISub,
    IZero,
    Imp,
    InRe,
    IntCmp,
    LenCmp,
    Not,
    Or,
    SConcat,
    SEmpty,
    SInt,
    SRev,
    SSub,
    SVar,
    SeqEq,
    ZAny,
    ZCat,
    ZLit,
    ZPlus,
    ZPow,
    ZSet,
    ZStar,
    ZUnion,
    qf,
)
from seqsolve.parser import FragmentError, ParseError, parse_formula, parse_matrix
from seqsolve.printer import print_formula, print_matrix


# [DERIVED] hand-built trees
def test_concat_is_right_associative():
    m = parse_matrix("x ++ y ++ z = w")
    assert m == SeqEq(
        SConcat(SVar("x"), SConcat(SVar("y"), SVar("z"))), SVar("w")
    )


def test_addition_is_left_associative_and_looser_than_concat():
    m = parse_matrix("x ++ y + 2 == 5")
    # (x ++ y) + 2, the sum coerces both operands to integers
    assert m == IntCmp(
        "==",
        IAdd(IOfSeq(SConcat(SVar("x"), SVar("y"))), IConst(2)),
        IConst(5),
    )


def test_subtraction_builds_isub():
    m = parse_matrix("a - b - 1 == 0")
    assert m == IntCmp(
        "==",
        ISub(ISub(IOfSeq(SVar("a")), IOfSeq(SVar("b"))), IOne()),
        IZero(),
    )


def test_zero_and_one_use_dedicated_nodes():
    m = parse_matrix("x == 0 & y == 1")
    assert m == And(
        IntCmp("==", IOfSeq(SVar("x")), IZero()),
        IntCmp("==", IOfSeq(SVar("y")), IOne()),
    )


def test_integer_literal_in_sequence_position_is_singleton():
    assert parse_matrix("x = 7") == SeqEq(SVar("x"), SInt(IConst(7)))
    assert parse_matrix("x = -7") == SeqEq(SVar("x"), SInt(IConst(-7)))


def test_first_last_rest_are_subrange_sugar():
    m = parse_matrix("first(x) = last(y) & rest(z) = eps")
    assert m == And(
        SeqEq(SSub(SVar("x"), 1, 1), SSub(SVar("y"), 0, 0)),
        SeqEq(SSub(SVar("z"), 2, 0), SEmpty()),
    )


def test_subrange_indices_may_be_negative():
    assert parse_matrix("x[2:-1] = eps") == SeqEq(SSub(SVar("x"), 2, -1), SEmpty())
    assert parse_matrix("x[-3:0] = eps") == SeqEq(SSub(SVar("x"), -3, 0), SEmpty())


def test_rev_node():
    assert parse_matrix("rev(x ++ y) = x") == SeqEq(
        SRev(SConcat(SVar("x"), SVar("y"))), SVar("x")
    )


def test_len_atom():
    assert parse_matrix("len(x ++ y) >= 2") == LenCmp(
        SConcat(SVar("x"), SVar("y")), ">=", 2
    )


def test_connective_precedence_and_associativity():
    m = parse_matrix("a = eps => b = eps => c = eps")
    ae = SeqEq(SVar("a"), SEmpty())
    be = SeqEq(SVar("b"), SEmpty())
    ce = SeqEq(SVar("c"), SEmpty())
    assert m == Imp(ae, Imp(be, ce))
    m2 = parse_matrix("a = eps | b = eps & !c = eps")
    assert m2 == Or(ae, And(be, Not(ce)))


def test_quantifier_prefix():
    f = parse_formula("forall x, y . x = y")
    assert f.quantifier == "forall"
    assert f.prefix == ("x", "y")
    f2 = parse_formula("exists x . exists y . x = y")
    assert f2.quantifier == "exists"
    assert f2.prefix == ("x", "y")
    f3 = parse_formula("x = x")
    assert f3.quantifier is None and f3.prefix == ()


def test_regex_grammar():
    m = parse_matrix("u in {1, -2} (INT^2 | eps)+ | 5*")
    assert m == InRe(
        SVar("u"),
        ZUnion(
            (
                ZCat(
                    (
                        ZSet((1, -2)),
                        ZPlus(ZUnion((ZPow(ZAny(), 2), ZCat(())))),
                    )
                ),
                ZStar(ZLit(5)),
            )
        ),
    )


def test_parenthesised_term_versus_matrix():
    # "(" can open either a matrix or a term; both must resolve
    assert parse_matrix("(x ++ y) = z") == SeqEq(
        SConcat(SVar("x"), SVar("y")), SVar("z")
    )
    assert parse_matrix("(x = y) & z = w") == And(
        SeqEq(SVar("x"), SVar("y")), SeqEq(SVar("z"), SVar("w"))
    )
    assert parse_matrix("((x ++ y)) = z") == SeqEq(
        SConcat(SVar("x"), SVar("y")), SVar("z")
    )
    assert parse_matrix("(x) == 3") == IntCmp("==", IOfSeq(SVar("x")), IConst(3))


def test_comments_and_whitespace():
    src = """
    # a comment
    forall x .  # trailing comment
      x = x
    """
    assert parse_formula(src) == Formula("forall", ("x",), SeqEq(SVar("x"), SVar("x")))


# [TRIVIAL] interface properties
ROUND_TRIP_CASES = [
    "forall x, y . x = y ++ y => len(x) != 1",
    "exists u . u in (2 3)* & first(u) == 2 & rev(u) = u",
    "x ++ y = y ++ x <=> x = eps | y = eps",
    "forall s . s in INT INT* => last(s) >= first(s) - 3 + -2",
    "x[2:-1] = rest(y) & len(x) > 0 & !(x = eps) & true",
    "u in {1, -2} (INT^2 | eps)+ | 5*",
    "x == -7 & -7 < y + z",
    "(x ++ 3) ++ y = x ++ 3 ++ y",
    "exists p . p in 1 INT* 1 & len(p) >= 2",
    "x = eps | false",
    "first(x ++ y) == first(x) + 0 - 1",
    "rev(rev(x)) = x & x[1:2] = x[-2:0]",
]


@pytest.mark.parametrize("src", ROUND_TRIP_CASES)
def test_print_parse_round_trip(src):
    f = parse_formula(src)
    assert parse_formula(print_formula(f)) == f


def test_printer_matrix_round_trip_under_negation():
    m = parse_matrix("!(a = eps & b = eps) | !c = eps")
    assert parse_matrix(print_matrix(m)) == m


# error reporting
def test_reserved_extension_tokens_raise_fragment_error():
    for bad in ["elg(x, y) = z", "sum(x) == 3", "count(x, 4) == 1"]:
        with pytest.raises(FragmentError):
            parse_matrix(bad)


def test_mixed_quantifiers_raise_fragment_error():
    with pytest.raises(FragmentError):
        parse_formula("forall x . exists y . x = y")
    with pytest.raises(FragmentError):
        parse_formula("exists x . forall y . x = y")


def test_nested_quantifier_raises_fragment_error():
    with pytest.raises(FragmentError):
        parse_formula("forall x . x = x & exists y . y = x")


def test_same_quantifier_groups_merge():
    f = parse_formula("forall x . forall y, z . x = y ++ z")
    assert f.prefix == ("x", "y", "z")


def test_dollar_names_rejected_unless_internal():
    with pytest.raises(ParseError):
        parse_matrix("$h1 = eps")
    assert parse_matrix("$h1 = eps", allow_internal_names=True) == SeqEq(
        SVar("$h1"), SEmpty()
    )


def test_error_positions():
    with pytest.raises(ParseError) as e:
        parse_formula("x =")
    assert e.value.line == 1
    with pytest.raises(ParseError) as e:
        parse_formula("forall x .\n  x = @")
    assert e.value.line == 2
    with pytest.raises(ParseError, match="trailing"):
        parse_formula("x = y y")
    with pytest.raises(ParseError, match="duplicate"):
        parse_formula("forall x, x . x = x")
    with pytest.raises(ParseError, match="keyword"):
        parse_formula("forall in . in = eps")


def test_spans_nest():
    f = parse_formula("forall x . x ++ y = eps")
    m = f.matrix
    assert f.loc is not None and m.loc is not None
    assert f.loc.covers(m.loc)
    assert m.loc.covers(m.left.loc)
    assert m.left.loc.covers(m.left.right.loc)


def test_locations_do_not_affect_equality():
    a = parse_matrix("x  =  y")
    b = parse_matrix("x = y")
    assert a == b
    assert hash(a.left) == hash(b.left)
