import pytest
from hypothesis import given, settings

from ltltree.errors import LtlSyntaxError, UnknownOperator
from ltltree.ltl import (FALSE, TRUE, Always, And, Atom, Eventually, Implies,
                         LassoWord, Next, Not, Or, Release, Until, atoms,
                         eval_lasso, is_nnf, parse_ltl, to_nnf, to_str)
from ltltree.scenarios import CASE2_FORMULA

from conftest import all_lassos, formulas, lasso_words

a, b, c = Atom("a"), Atom("b"), Atom("c")


class TestParse:
    def test_always_eventually(self):
        assert parse_ltl("G F a") == Always(Eventually(a))

    def test_until_with_conjunction(self):
        assert parse_ltl("a U (b & !c)") == Until(a, And(b, Not(c)))

    def test_spin_aliases(self):
        assert parse_ltl("[]<> a && b || !c") == parse_ltl("(G F a & b) | !c")

    def test_until_binds_tighter_than_and(self):
        assert parse_ltl("a & b U c") == And(a, Until(b, c))

    def test_until_right_associative(self):
        assert parse_ltl("a U b U c") == Until(a, Until(b, c))

    def test_implies_right_associative_and_loosest(self):
        assert parse_ltl("a | b -> c -> a") == Implies(Or(a, b), Implies(c, a))

    def test_unary_binds_tightest(self):
        assert parse_ltl("!a U X b") == Until(Not(a), Next(b))

    def test_robot_atoms(self):
        assert parse_ltl("r1@l5 & r12@l_3") == And(Atom("r1@l5"), Atom("r12@l_3"))

    def test_comments_ignored(self):
        assert parse_ltl("# task\nF a  # reach a\n") == Eventually(a)

    def test_case_two_formula_shape(self):
        f = parse_ltl(CASE2_FORMULA)
        conjuncts, stack = [], [f]
        while stack:
            g = stack.pop()
            if isinstance(g, And):
                stack += [g.right, g.left]
            else:
                conjuncts.append(g)
        assert len(conjuncts) == 5
        kinds = [type(x).__name__ for x in _walk(f)]
        assert kinds.count("Until") == 1 and kinds.count("Next") == 1

    def test_missing_operand(self):
        with pytest.raises(LtlSyntaxError) as info:
            parse_ltl("a U")
        assert info.value.offset == 3
        assert "atom" in info.value.expected

    def test_offset_is_in_bytes(self):
        with pytest.raises(LtlSyntaxError) as info:
            parse_ltl("é & )")
        # the accented letter is not an atom character, so it is reported first
        assert info.value.offset == 0

    def test_unknown_operator(self):
        with pytest.raises(UnknownOperator) as info:
            parse_ltl("a <-> b")
        assert info.value.offset == 2

    def test_empty(self):
        with pytest.raises(LtlSyntaxError):
            parse_ltl("  # nothing\n")

    def test_unbalanced(self):
        with pytest.raises(LtlSyntaxError):
            parse_ltl("(a & b")

    @given(formulas())
    def test_print_parse_round_trip(self, f):
        assert parse_ltl(to_str(f)) == f


def _walk(f):
    yield f
    for ch in f.children():
        yield from _walk(ch)


class TestNnf:
    def test_not_eventually(self):
        assert to_nnf(Not(Eventually(a))) == Release(FALSE, Not(a))

    def test_not_until(self):
        assert to_nnf(Not(Until(a, b))) == Release(Not(a), Not(b))

    def test_not_next(self):
        assert to_nnf(Not(Next(a))) == Next(Not(a))

    def test_derived_operators_removed(self):
        f = to_nnf(parse_ltl("G(a -> F b)"))
        assert f == Release(FALSE, Or(Not(a), Until(TRUE, b)))

    @given(formulas())
    def test_shape(self, f):
        assert is_nnf(to_nnf(f))

    @settings(max_examples=60, deadline=None)
    @given(formulas(max_leaves=5))
    def test_semantics_preserved(self, f):
        g = to_nnf(f)
        for w in all_lassos(("a", "b", "c"), 2, 1):
            assert eval_lasso(f, w) == eval_lasso(g, w)


class TestEvalLasso:
    def test_always_eventually(self):
        assert eval_lasso(parse_ltl("G F a"), LassoWord.of([set()], [{"a"}]))

    def test_always_fails_later(self):
        assert not eval_lasso(parse_ltl("G a"), LassoWord.of([{"a"}], [set()]))

    def test_until(self):
        assert eval_lasso(parse_ltl("a U b"), LassoWord.of([{"a"}, {"a", "b"}], [set()]))

    def test_until_needs_right_side(self):
        assert not eval_lasso(parse_ltl("a U b"), LassoWord.of([], [{"a"}]))

    def test_release_may_hold_forever(self):
        assert eval_lasso(parse_ltl("a R b"), LassoWord.of([], [{"b"}]))

    def test_next_crosses_into_cycle(self):
        w = LassoWord.of([set()], [{"a"}, set()])
        assert eval_lasso(parse_ltl("X a"), w)
        assert not eval_lasso(parse_ltl("X X a"), w)
        assert eval_lasso(parse_ltl("X X X a"), w)

    def test_eventually_always(self):
        assert eval_lasso(parse_ltl("F G a"), LassoWord.of([set(), set()], [{"a"}]))
        assert not eval_lasso(parse_ltl("F G a"), LassoWord.of([], [{"a"}, set()]))

    def test_empty_cycle_rejected(self):
        with pytest.raises(ValueError):
            LassoWord.of([{"a"}], [])

    @given(formulas(), lasso_words)
    def test_unrolling_invariance(self, f, w):
        # moving one cycle pass into the prefix denotes the same word
        unrolled = LassoWord(w.prefix + w.cycle, w.cycle)
        doubled = LassoWord(w.prefix, w.cycle + w.cycle)
        assert eval_lasso(f, w) == eval_lasso(f, unrolled) == eval_lasso(f, doubled)

    @given(formulas(), lasso_words)
    def test_negation(self, f, w):
        assert eval_lasso(Not(f), w) != eval_lasso(f, w)


def test_atoms():
    assert atoms(parse_ltl("a U (b & !c) | true")) == {"a", "b", "c"}
