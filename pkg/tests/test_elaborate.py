"""Elaboration tests.

The heart of this file is an equivalence driver: for a formula with
shorthand constructs, every assignment to the original variables is
extended to assignments of the fresh '$'-variables that satisfy the
guards (found by enumeration, not by trusting the rewriter), and the
rewritten core matrix must agree with the reference evaluation of the
original matrix on every such extension. Together with non-emptiness
of the extension set this establishes both quantifier readings at
once. Expected shapes in the unit tests are hand-derived [DERIVED];
the driver checks are oracle-backed.
"""

import itertools

import pytest

from seqsolve.ast import (
    And,
    BoolLit,
    IOfSeq,
    InRe,
    IntCmp,
    Not,
    Or,
    SEmpty,
    SVar,
    SeqEq,
    matrix_vars,
)
from seqsolve.elaborate import (
    Elaboration,
    ElaborationError,
    elaborate,
    expand_lencmp,
    rev_regex,
    validate_core,
    z_at_least,
    z_at_most,
    z_exact,
)
from seqsolve.oracle import Bounds, enum_seqs, iter_envs, matrix_value
from seqsolve.parser import parse_formula, parse_matrix


def guard_extensions(elab: Elaboration, env, pool, cap=400):
    """All ways to value the fresh variables so that every guard holds,
    found guard by guard via enumeration."""
    candidates = [dict(env)]
    for g in elab.guards:
        needed = sorted(n for n in matrix_vars(g) if n not in candidates[0])
        new = []
        for cand in candidates:
            if not needed:
                if matrix_value(g, cand):
                    new.append(cand)
                continue
            for combo in itertools.product(pool, repeat=len(needed)):
                ext = cand | dict(zip(needed, combo))
                if matrix_value(g, ext):
                    new.append(ext)
                    if len(new) >= cap:
                        break
            if len(new) >= cap:
                break
        candidates = new
        if not candidates:
            return []
    return candidates


def assert_faithful(src, *, values=(0, 1), max_len=2, fresh_max_len=4, fresh_values=None):
    f = parse_formula(src)
    assert f.quantifier is None, "driver expects a bare matrix"
    elab = elaborate(f)
    orig_vars = tuple(sorted(matrix_vars(f.matrix)))
    pool = list(enum_seqs(Bounds(fresh_max_len, fresh_values or values)))
    for env in iter_envs(orig_vars, Bounds(max_len, values)):
        want = matrix_value(f.matrix, env)
        exts = guard_extensions(elab, env, pool)
        assert exts, f"guards unsatisfiable for {env} in {src!r}"
        for ext in exts:
            got = matrix_value(elab.core_matrix, ext)
            assert got == want, f"{src!r} at {env}: core gave {got}, expected {want} (ext {ext})"


# subranges, over both static shapes and all three dynamic clauses
@pytest.mark.parametrize(
    "src",
    [
        "x[1:2] = y",
        "x[2:0] = y",
        "x[0:0] = y",
        "x[-1:0] = y",
        "x[1:1] = x",
        "first(x) = last(x)",
        "rest(x) = x[2:0]",
        "x[1:0] = x",
        "x[3:1] = y",
    ],
)
def test_subrange_expansion_faithful(src):
    # pieces of a split are never longer than the subject, so the fresh
    # pool can share the original length bound
    assert_faithful(src, fresh_max_len=2)


def test_subrange_of_concatenation_faithful():
    assert_faithful("(x ++ y)[2:2] = first(y)", max_len=1, fresh_max_len=2)


# integer arithmetic and derived comparisons; the fresh variables here
# only matter through their first element, so a length-1 pool with a
# band wide enough to hold all sums and differences is exhaustive
@pytest.mark.parametrize(
    "src",
    [
        "x > y",
        "x >= y | x != y",
        "x <= y",
        "x == y + z",
        "x < y + z",
        "x == y - z",
        "x + y == z - x",
        "x == 0",
        "x == 1 & y == x + x",
    ],
)
def test_arithmetic_lowering_faithful(src):
    assert_faithful(
        src, values=(0, 1), max_len=2, fresh_max_len=1, fresh_values=(-2, -1, 0, 1, 2, 3, 4)
    )


def test_arithmetic_over_subranges_faithful():
    assert_faithful(
        "first(x) + 1 == last(y)", values=(0, 1), max_len=2, fresh_max_len=2, fresh_values=(0, 1, 2)
    )


def test_constant_atoms_faithful():
    assert_faithful("x == 2 | x < 2", values=(1, 2, 3), max_len=1, fresh_max_len=1, fresh_values=(1, 2, 3))


def test_reversal_faithful_after_abstraction():
    # the abstraction renames x to its reversal; evaluate the core
    # matrix on the reversed values and compare against the original
    src = "rev(x) ++ r = rev(y) & x = eps"
    f = parse_formula(src)
    elab = elaborate(f)
    assert elab.rev_map == {"x": "$rev_x", "y": "$rev_y"}
    bounds = Bounds(2, (0, 1))
    for env in iter_envs(("x", "r", "y"), bounds):
        want = matrix_value(f.matrix, env)
        core_env = {
            "$rev_x": tuple(reversed(env["x"])),
            "$rev_y": tuple(reversed(env["y"])),
            "r": env["r"],
        }
        exts = guard_extensions(elab, core_env, list(enum_seqs(Bounds(3, (0, 1)))))
        assert exts
        for ext in exts:
            assert matrix_value(elab.core_matrix, ext) == want


def test_reversal_with_subranges_faithful():
    src = "rev(rest(x)) ++ first(x) = rev(x)"
    f = parse_formula(src)
    elab = elaborate(f)
    assert elab.rev_map == {"x": "$rev_x"}
    for env in iter_envs(("x",), Bounds(3, (4, 7))):
        want = matrix_value(f.matrix, env)  # always True, but check both routes
        core_env = {"$rev_x": tuple(reversed(env["x"]))}
        exts = guard_extensions(elab, core_env, list(enum_seqs(Bounds(3, (4, 7)))))
        assert exts
        for ext in exts:
            assert matrix_value(elab.core_matrix, ext) == want


# hand-derived shapes [DERIVED]
def test_rev_of_rev_cancels():
    elab = elaborate(parse_formula("rev(rev(x)) = x"))
    assert elab.rev_map == {}
    assert elab.core_matrix == SeqEq(SVar("x"), SVar("x"))


def test_rev_of_concat_distributes():
    elab = elaborate(parse_formula("rev(x ++ y) = rev(y) ++ rev(x)"))
    assert elab.rev_map == {"x": "$rev_x", "y": "$rev_y"}
    assert elab.core_matrix == SeqEq(
        parse_matrix("$rev_y ++ $rev_x = a", allow_internal_names=True).left,
        parse_matrix("$rev_y ++ $rev_x = a", allow_internal_names=True).left,
    )


def test_rev_equals_rev_strips():
    elab = elaborate(parse_formula("rev(x) = rev(y)"))
    assert elab.rev_map == {}
    assert elab.core_matrix == SeqEq(SVar("x"), SVar("y"))


def test_palindrome_constraint_is_rejected():
    with pytest.raises(ElaborationError):
        elaborate(parse_formula("rev(x) = x"))
    with pytest.raises(ElaborationError):
        elaborate(parse_formula("rev(x) = x ++ y"))


def test_len_of_rev_carries_over():
    elab = elaborate(parse_formula("len(rev(x)) == 2"))
    assert elab.rev_map == {}
    assert elab.core_matrix == InRe(SVar("x"), z_exact(2))


def test_membership_of_rev_reverses_regex():
    f = parse_formula("rev(x) in 1 2 INT*")
    elab = elaborate(f)
    assert elab.rev_map == {}
    got = elab.core_matrix
    assert isinstance(got, InRe) and got.arg == SVar("x")
    bounds = Bounds(3, (1, 2, 3))
    for env in iter_envs(("x",), bounds):
        assert matrix_value(got, env) == matrix_value(f.matrix, env)


def test_statically_empty_subrange_folds():
    elab = elaborate(parse_formula("x[-1:2] = y"))
    assert elab.guards == ()
    assert elab.core_matrix == SeqEq(SEmpty(), SVar("y"))


def test_subrange_of_eps_folds():
    elab = elaborate(parse_formula("eps[1:1] = y"))
    assert elab.guards == ()
    assert elab.core_matrix == SeqEq(SEmpty(), SVar("y"))


def test_identical_subranges_share_one_expansion():
    elab = elaborate(parse_formula("first(x) = y & first(x) = z"))
    assert len([g for g in elab.guards if isinstance(g, Or)]) == 1


def test_constants_share_one_witness_variable():
    elab = elaborate(parse_formula("x < 5 & y < 5"))
    assert elab.fresh_vars.count("$c5") == 1
    memberships = [g for g in elab.guards if isinstance(g, InRe)]
    assert len(memberships) == 1


def test_universal_reading_uses_implication():
    elab = elaborate(parse_formula("forall x . first(x) = eps"))
    assert elab.reading == "forall"
    assert not isinstance(elab.formula.matrix, And)
    elab2 = elaborate(parse_formula("exists x . first(x) = eps"))
    assert isinstance(elab2.formula.matrix, And)


def test_fresh_variables_join_the_prefix():
    f = parse_formula("exists x . first(x) = eps")
    elab = elaborate(f)
    assert elab.formula.prefix[0] == "x"
    assert set(elab.fresh_vars) <= set(elab.formula.prefix)


def test_lencmp_table_against_reference():
    # both routes are reference-level: LenCmp is evaluated directly,
    # the expansion goes through regex matching
    for op in ("==", "!=", "<", "<=", ">", ">="):
        for k in range(0, 4):
            m = parse_matrix(f"len(x) {op} {k}")
            e = expand_lencmp(m)
            for n in range(0, 6):
                env = {"x": (0,) * n}
                assert matrix_value(e, env) == matrix_value(m, env), (op, k, n)


def test_core_validation_rejects_shorthand():
    with pytest.raises(ElaborationError):
        validate_core(parse_matrix("len(x) == 1"))
    with pytest.raises(ElaborationError):
        validate_core(parse_matrix("x > y"))
    validate_core(parse_matrix("x = y ++ z & x < y | x in INT*"))


def test_elaborate_is_idempotent_on_core():
    f = parse_formula("x = y ++ z & x < y")
    elab = elaborate(f)
    again = elaborate(parse_formula(src := "x = y ++ z & x < y"))
    assert elab.core_matrix == again.core_matrix
    assert elaborate(elab.formula).core_matrix == elab.formula.matrix
