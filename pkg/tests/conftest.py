import itertools

import pytest
from hypothesis import strategies as st

from ltltree.ltl import (FALSE, TRUE, Always, And, Atom, Eventually, Implies,
                         LassoWord, Next, Not, Or, Release, Until)

ATOMS = ("a", "b", "c")


def all_lassos(atoms, max_prefix=3, max_cycle=2):
    """Every lasso word over ``atoms`` with the given length bounds."""
    letters = [frozenset(s) for k in range(len(atoms) + 1)
               for s in itertools.combinations(atoms, k)]
    for lp in range(max_prefix + 1):
        for prefix in itertools.product(letters, repeat=lp):
            for lc in range(1, max_cycle + 1):
                for cycle in itertools.product(letters, repeat=lc):
                    yield LassoWord(prefix, cycle)


def formulas(atoms=ATOMS, max_leaves=6):
    leaves = st.sampled_from([Atom(a) for a in atoms] + [TRUE, FALSE])
    unary = (Not, Next, Eventually, Always)
    binary = (And, Or, Implies, Until, Release)

    def extend(children):
        return st.one_of(
            st.builds(lambda op, x: op(x), st.sampled_from(unary), children),
            st.builds(lambda op, x, y: op(x, y), st.sampled_from(binary), children, children),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


letters = st.frozensets(st.sampled_from(ATOMS))
lasso_words = st.builds(LassoWord.of, st.lists(letters, max_size=4),
                        st.lists(letters, min_size=1, max_size=3))


@pytest.fixture(scope="session")
def small_corpus():
    return list(all_lassos(("a", "b"), 2, 2))
