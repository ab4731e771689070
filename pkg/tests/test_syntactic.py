import pytest

from preclones.automata import (
    boolean_alphabet,
    complement,
    intersect,
    k_exists,
    k_mod,
    left_quotient,
    right_quotient,
)
from preclones.errors import RankOverflow
from preclones.preclone import (
    accepting_elements,
    check_axioms,
    morphism_eval,
    t_exists,
    t_mod,
    transformation_pgpair,
)
from preclones.syntactic import (
    Context,
    enumerate_contexts,
    find_isomorphism,
    is_L_context,
    isomorphic,
    syntactic_congruence,
    syntactic_pgpair,
)
from preclones.trees import alphabet, enumerate_trees, oplus

DBOOL = boolean_alphabet([0, 2])


def test_enumerate_contexts_counts():
    S = t_exists(3).preclone
    # k=0, n=1: k1=k2=0, u in sort 1 (2 choices), v a 1-tuple of rank 0 (2)
    assert len(enumerate_contexts(S, 0, 1)) == 4
    # k=0, n=0: (u, 0, (), 0) with u in sort 1
    cs = enumerate_contexts(S, 0, 0)
    assert len(cs) == 2
    assert all(c.v == () and c.k1 == c.k2 == 0 for c in cs)


def test_enumerate_contexts_empty_when_no_rank_fits():
    S = t_exists(2).preclone
    # k=0, n=2: v needs two components of total rank 0: fine; but for a
    # preclone with empty sort the list is empty
    from preclones.preclone import FinitaryPreclone, identity_key, _transformation_compose

    tiny = FinitaryPreclone(2, _transformation_compose, None)
    tiny.set_unit(tiny.intern(1, identity_key(2)))
    assert enumerate_contexts(tiny, 0, 1) == []  # sort 0 empty


def test_enumerate_contexts_requires_room_for_u():
    S = t_exists(2).preclone
    with pytest.raises(RankOverflow):
        enumerate_contexts(S, 2, 0)


def test_is_L_context_examples():
    S = t_exists(3).preclone
    P = {(0, 1)}  # {true_0}
    or1, true1 = (1, 0), (1, 1)
    true0, false0 = (0, 1), (0, 0)
    c = Context(or1, 0, (), 0)
    assert is_L_context(S, P, true0, c)
    assert not is_L_context(S, P, false0, c)
    c_true = Context(true1, 0, (), 0)
    assert is_L_context(S, P, true0, c_true)
    assert is_L_context(S, P, false0, c_true)


def test_syntactic_congruence_of_k_exists_image():
    res = transformation_pgpair(k_exists(DBOOL, 0), 3)
    S = res.pgpair.preclone
    P = accepting_elements(res)
    blocks = syntactic_congruence(S, 0, P)
    assert [len(b) for b in blocks] == [2, 2, 2, 2]


def test_syntactic_congruence_trivial_P():
    S = t_exists(3).preclone
    for P in (set(), set(S.sort(0))):
        blocks = syntactic_congruence(S, 0, P)
        assert all(len(bs) == 1 for bs in blocks)


def test_syntactic_pgpair_k_exists():
    syn = syntactic_pgpair(k_exists(DBOOL, 0), 3)
    Q = syn.pgpair.preclone
    assert [Q.sort_size(n) for n in range(4)] == [2, 2, 2, 2]
    assert isomorphic(Q, t_exists(3).preclone)
    assert check_axioms(Q).ok


@pytest.mark.parametrize("p,r", [(2, 0), (2, 1), (3, 1)])
def test_syntactic_pgpair_k_mod(p, r):
    syn = syntactic_pgpair(k_mod(DBOOL, 0, p, r), 3)
    Q = syn.pgpair.preclone
    assert [Q.sort_size(n) for n in range(4)] == [p] * 4
    assert isomorphic(Q, t_mod(p, 3).preclone)


def test_syntactic_pgpair_empty_language():
    empty = intersect(k_exists(DBOOL, 0), complement(k_exists(DBOOL, 0)))
    syn = syntactic_pgpair(empty, 3)
    Q = syn.pgpair.preclone
    assert all(Q.sort_size(n) == 1 for n in range(4))


def test_syntactic_morphism_recognizes():
    a = k_mod(DBOOL, 0, 2, 1)
    syn = syntactic_pgpair(a, 3)
    for t in enumerate_trees(DBOOL, 0, 4):
        assert (morphism_eval(syn.morphism, t) in syn.accepting) == a.accepts(t)


def test_congruence_saturates_language():
    a = k_exists(DBOOL, 1)
    syn = syntactic_pgpair(a, 3)
    for t in enumerate_trees(DBOOL, 1, 3):
        assert (morphism_eval(syn.morphism, t) in syn.accepting) == a.accepts(t)


def test_context_membership_equals_double_quotient():
    # for contexts in the free preclone: C is an L-context of f iff
    # f is in the right quotient (by v) of the left quotient (by u)
    a = k_mod(DBOOL, 1, 2, 1)
    u = next(t for t in enumerate_trees(DBOOL, 2, 3))
    v = oplus([next(t for t in enumerate_trees(DBOOL, 0, 1))])
    from preclones.trees import compose, unit_tuple

    lq = left_quotient(a, u, 0, 1)  # rank 0 language
    # plug f.v into u at the hole: rank arithmetic: k=1, k1=0, k2=1
    for f in enumerate_trees(DBOOL, 1, 3):
        fv = compose(f, v)
        direct = a.accepts(compose(u, (fv,) + unit_tuple(1)))
        via_quotients = right_quotient(lq, v).accepts(f)
        assert direct == via_quotients


def test_find_isomorphism_respects_structure():
    S = t_mod(3, 2).preclone
    T = t_mod(3, 2).preclone
    m = find_isomorphism(S, T)
    assert m is not None
    for f, gs in S.iter_compositions():
        assert m[S.compose(f, gs)] == T.compose(m[f], [m[g] for g in gs])


def test_find_isomorphism_rejects_different():
    assert find_isomorphism(t_exists(2).preclone, t_mod(2, 2).preclone) is None
    assert find_isomorphism(t_mod(2, 2).preclone, t_mod(3, 2).preclone) is None
