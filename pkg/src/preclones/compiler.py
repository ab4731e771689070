"""Compilation of formulas into block-product recognizers.

The structural induction: atoms become transformation pg-pairs of directly
built automata over the extended alphabet; negation complements the
accepting set inside the valid part; disjunction and conjunction tuple
recognizers into direct products; a quantifier Q_K combines the syntactic
pg-pair of K with a pg-pair recognizing all family languages at once,
through the block product.  The simultaneous recognizer is obtained from
the product of the recursively compiled automata, minimized and then
quotiented by the joint syntactic congruence of its accepting and
validity subsets, which keeps context tables small.

A recognizer's membership test is morphism evaluation into the carrier
followed by an accepting-set lookup; it is meaningful on structures (each
free variable occurring exactly once).  Every recognizer also carries a
companion automaton over the extended alphabet whose language agrees with
the formula on valid structures; these feed the next quantifier level.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .automata import TreeAutomaton, minimize
from .errors import DeterminismViolation, RankOverflow
from .logic import (
    And,
    ATOMS,
    FalseF,
    LeftJ,
    Less,
    Max,
    Not,
    Or,
    PSym,
    QK,
    RightJ,
    Root,
    Succ,
    TrueF,
    ext_symbol,
    extend_alphabet,
    free_vars,
    mk_structure,
    satisfies,
    split_symbol,
    structures,
)
from .preclone import (
    DEFAULT_BUDGET,
    Morphism,
    PgPair,
    accepting_elements,
    apply_transformation,
    direct_product,
    sub_pgpair_generated,
    target_tupling,
    transformation_pgpair,
)
from .syntactic import Context, syntactic_congruence, syntactic_pgpair
from .preclone import quotient as preclone_quotient
from .blockprod import BlockProduct
from .trees import RankedAlphabet, RankedTree, rank as tree_rank


@dataclass
class CompiledRecognizer:
    pgpair: PgPair
    gamma: Morphism  # from the extended alphabet into the carrier
    accepting: frozenset  # subset of the carrier's sort k
    valid: frozenset  # carrier elements that images of valid structures hit
    rank: int
    variables: tuple  # sorted free-variable set Y
    sigma: RankedAlphabet
    ext_alphabet: RankedAlphabet  # Sigma_Y
    automaton: TreeAutomaton  # companion, agrees with the formula on structures
    tau: Morphism = None  # quantifier case only: the simultaneous recognizer


def membership(rec: CompiledRecognizer, structure: RankedTree) -> bool:
    """Evaluate a structure through gamma and test the accepting set."""
    if tree_rank(structure) != rec.rank:
        raise ValueError(
            f"structure has rank {tree_rank(structure)}, recognizer {rec.rank}"
        )
    return rec.gamma.eval(structure) in rec.accepting


def membership_interp(rec: CompiledRecognizer, t: RankedTree, lam: dict) -> bool:
    return membership(rec, mk_structure(t, lam))


# ---------------------------------------------------------------------------
# atomic automata


def _counts_add(counts, extra):
    return tuple(min(2, c + e) for c, e in zip(counts, extra))


def _atom_automaton(phi, sigma: RankedAlphabet, variables, k: int) -> tuple:
    """Automaton over Sigma_Y for an atomic formula, plus its two final sets.

    States combine saturated per-variable occurrence counts with the
    predicate's own bookkeeping; variable leaves get dedicated states so
    the leaf-inspecting atoms can see them.  Returns
    (automaton-with-sat-finals, valid_finals).
    """
    variables = tuple(sorted(variables))
    vpos = {v: i for i, v in enumerate(variables)}
    ext = extend_alphabet(sigma, variables)
    zeros = (0,) * len(variables)
    ones = (1,) * len(variables)
    letters = []
    for name, m in ext.symbols:
        base, zs = split_symbol(name)
        extra = [0] * len(variables)
        for z in zs:
            extra[vpos[z]] = 1
        letters.append((name, m, base, zs, tuple(extra)))

    # state: ("var", j) for a v_j leaf, else ("nv", counts, payload)
    def node_state(letter, child_states):
        name, m, base, zs, extra = letter
        counts = zeros
        for s in child_states:
            if s[0] == "nv":
                counts = _counts_add(counts, s[1])
        counts = _counts_add(counts, extra)
        payload = _payload(phi, base, zs, child_states, vpos, k)
        return ("nv", counts, payload)

    # reachable closure with a frontier: after the first full round, only
    # combinations touching a newly discovered state need recomputation
    states = {("var", j) for j in range(1, k + 1)}
    frontier = set(states)
    first = True
    while True:
        new = set()
        known = sorted(states)
        for letter in letters:
            m = letter[1]
            for combo in itertools.product(known, repeat=m):
                if not first and not any(c in frontier for c in combo):
                    continue
                s = node_state(letter, combo)
                if s not in states and s not in new:
                    new.add(s)
        if not new:
            break
        first = False
        states |= new
        frontier = new
    ordered = sorted(states)
    idx = {s: i for i, s in enumerate(ordered)}
    transitions = {}
    for letter in letters:
        name, m = letter[0], letter[1]
        table = {}
        for combo in itertools.product(range(len(ordered)), repeat=m):
            s = node_state(letter, tuple(ordered[c] for c in combo))
            table[combo] = idx[s]
        transitions[name] = table
    var_state = tuple(idx[("var", j)] for j in range(1, k + 1))
    # a run ends on a "var" state only for the unit tree, which is a valid
    # structure exactly when there are no variables to place; it satisfies
    # the constant true and nothing else (every other atom needs a node)
    unit_ok = not variables
    sat = frozenset(
        idx[s]
        for s in ordered
        if (s[0] == "nv" and s[1] == ones and _is_final(phi, s[2]))
        or (s[0] == "var" and unit_ok and isinstance(phi, TrueF))
    )
    valid = frozenset(
        idx[s]
        for s in ordered
        if (s[0] == "nv" and s[1] == ones) or (s[0] == "var" and unit_ok)
    )
    aut = TreeAutomaton(ext, k, len(ordered), var_state, transitions, sat)
    return aut, valid


def _payload(phi, base, zs, child_states, vpos, k):
    def child_counts(s):
        return s[1] if s[0] == "nv" else (0,) * len(vpos)

    def child_payload(s):
        return s[2] if s[0] == "nv" else None

    if isinstance(phi, (TrueF, FalseF)):
        return ()
    if isinstance(phi, PSym):
        sat = any(
            child_payload(s) is not None and child_payload(s)[0] for s in child_states
        )
        return (sat or (phi.x in zs and base == phi.sym),)
    if isinstance(phi, Root):
        return (phi.x in zs,)  # re-evaluated at every level; read at the root
    if isinstance(phi, Less):
        sat = any(
            child_payload(s) is not None and child_payload(s)[0] for s in child_states
        )
        if phi.x in zs:
            sat = sat or any(
                child_counts(s)[vpos[phi.y]] >= 1 for s in child_states
            )
        return (sat,)
    if isinstance(phi, Succ):
        sat = any(
            child_payload(s) is not None and child_payload(s)[1] for s in child_states
        )
        if phi.x in zs and phi.i <= len(child_states):
            s = child_states[phi.i - 1]
            sat = sat or (child_payload(s) is not None and child_payload(s)[0])
        return (phi.y in zs, sat)
    if isinstance(phi, Max):
        sat = any(
            child_payload(s) is not None and child_payload(s)[0] for s in child_states
        )
        if phi.x in zs and phi.i <= len(child_states):
            s = child_states[phi.i - 1]
            sat = sat or (s[0] == "var" and s[1] == phi.j)
        return (sat,)
    if isinstance(phi, (LeftJ, RightJ)):
        # payload: (vars in the subtree, the tracked index), both saturated at
        # k+1 so fake reachability combinations cannot inflate them; for
        # left_j the index is the count of vars left of x's subtree, for
        # right_j it is that count plus the vars inside it
        cap = k + 1
        nv = 0
        pos = None
        for s in child_states:
            if s[0] == "var":
                nv += 1
            else:
                _, _, (c_nv, c_pos) = s
                if c_pos is not None and pos is None:
                    pos = min(cap, nv + c_pos)
                nv += c_nv
        nv = min(cap, nv)
        if phi.x in zs:
            pos = 0 if isinstance(phi, LeftJ) else nv
        return (nv, pos)
    raise TypeError(f"not an atomic formula: {phi!r}")


def _is_final(phi, payload):
    if isinstance(phi, TrueF):
        return True
    if isinstance(phi, FalseF):
        return False
    if isinstance(phi, (PSym, Root, Less, Max)):
        return payload[0]
    if isinstance(phi, Succ):
        return payload[1]
    if isinstance(phi, LeftJ):
        return payload[1] == phi.j
    if isinstance(phi, RightJ):
        return payload[1] is not None and payload[1] + 1 == phi.j
    raise TypeError(f"not an atomic formula: {phi!r}")


def compile_atomic(phi, sigma: RankedAlphabet, variables, k: int,
                   budget=DEFAULT_BUDGET) -> CompiledRecognizer:
    """Recognizer for an atomic formula (or a constant) on Y-structures."""
    variables = tuple(sorted(variables))
    aut, valid_states = _atom_automaton(phi, sigma, variables, k)
    aut, (valid_states,) = minimize(aut, [valid_states])
    trunc = max(k, sigma.max_arity)
    res = transformation_pgpair(aut, trunc, budget=budget, eval_cap=k)
    accepting = frozenset(accepting_elements(res))
    valid = frozenset(accepting_elements(res, valid_states))
    return CompiledRecognizer(
        pgpair=res.pgpair,
        gamma=res.morphism,
        accepting=accepting,
        valid=valid,
        rank=k,
        variables=variables,
        sigma=sigma,
        ext_alphabet=aut.alphabet,
        automaton=aut,
    )


# ---------------------------------------------------------------------------
# products of recognizers


def _product_automaton(a: TreeAutomaton, b: TreeAutomaton, rule) -> TreeAutomaton:
    from .automata import _product

    return minimize(_product(a, b, rule))


def _combine(r1: CompiledRecognizer, r2: CompiledRecognizer, is_or: bool,
             budget) -> CompiledRecognizer:
    if r1.pgpair is r2.pgpair:
        acc = r1.accepting | r2.accepting if is_or else r1.accepting & r2.accepting
        aut = _product_automaton(
            r1.automaton, r2.automaton, (lambda x, y: x or y) if is_or else (lambda x, y: x and y)
        )
        return CompiledRecognizer(
            r1.pgpair, r1.gamma, frozenset(acc), r1.valid, r1.rank,
            r1.variables, r1.sigma, r1.ext_alphabet, aut,
        )
    prod = direct_product([r1.pgpair.preclone, r2.pgpair.preclone])
    tupled = target_tupling([r1.gamma, r2.gamma], prod)
    images = [tupled.image[name] for name, _ in r1.ext_alphabet.symbols]
    sub = sub_pgpair_generated(prod, images, budget=budget, eval_cap=r1.rank)
    carrier = sub.preclone
    image = {}
    for name, _ in r1.ext_alphabet.symbols:
        image[name] = carrier.lookup(tupled.image[name][0], tupled.image[name])
    gamma = Morphism(r1.ext_alphabet, carrier, image)
    k = r1.rank
    valid = frozenset(
        el
        for el in carrier.sort(k)
        if prod.key(carrier.key(el))[0] in r1.valid
        and prod.key(carrier.key(el))[1] in r2.valid
    )
    test = (lambda a, b: a or b) if is_or else (lambda a, b: a and b)
    accepting = frozenset(
        el
        for el in valid
        if test(
            prod.key(carrier.key(el))[0] in r1.accepting,
            prod.key(carrier.key(el))[1] in r2.accepting,
        )
    )
    aut = _product_automaton(
        r1.automaton, r2.automaton, (lambda x, y: x or y) if is_or else (lambda x, y: x and y)
    )
    return CompiledRecognizer(
        sub, gamma, accepting, valid, k, r1.variables, r1.sigma,
        r1.ext_alphabet, aut,
    )


def _negate(rec: CompiledRecognizer) -> CompiledRecognizer:
    aut = rec.automaton
    flipped = TreeAutomaton(
        aut.alphabet, aut.rank, aut.n_states, aut.var_state, aut.transitions,
        frozenset(range(aut.n_states)) - aut.finals,
    )
    return CompiledRecognizer(
        rec.pgpair, rec.gamma, frozenset(rec.valid - rec.accepting), rec.valid,
        rec.rank, rec.variables, rec.sigma, rec.ext_alphabet, flipped,
    )


# ---------------------------------------------------------------------------
# the quantifier case


def _product_many(automata):
    """Reachability-restricted product; returns (automaton, state tuples)."""
    alph = automata[0].alphabet
    k = automata[0].rank
    start = tuple(a.var_state for a in automata)
    var_states = [tuple(a.var_state[j] for a in automata) for j in range(k)]
    states = set(var_states)
    changed = True
    while changed:
        changed = False
        for name, m in alph.symbols:
            for combo in itertools.product(sorted(states), repeat=m):
                s = tuple(
                    a.transitions[name][tuple(c[i] for c in combo)]
                    for i, a in enumerate(automata)
                )
                if s not in states:
                    states.add(s)
                    changed = True
    ordered = sorted(states)
    idx = {s: i for i, s in enumerate(ordered)}
    transitions = {}
    for name, m in alph.symbols:
        table = {}
        for combo in itertools.product(range(len(ordered)), repeat=m):
            s = tuple(
                a.transitions[name][tuple(ordered[c][i] for c in combo)]
                for i, a in enumerate(automata)
            )
            table[combo] = idx[s]
        transitions[name] = table
    aut = TreeAutomaton(
        alph, k, len(ordered), tuple(idx[s] for s in var_states), transitions,
        frozenset(),
    )
    return aut, ordered


def _image_closure(T, tau: Morphism, ext, k, variables, x):
    """Images of trees of rank <= k, annotated with counts and x's node rank.

    Walks the tree algebra bottom-up: every (element, counts, xrank) that a
    real tree over the extended alphabet can produce is reached, exactly.
    Returns a set of (rank, element, counts, xrank) with xrank None when x
    does not occur (or occurs twice, in which case counts saturate).
    """
    allv = tuple(sorted(set(variables) | {x}))
    vpos = {v: i for i, v in enumerate(allv)}
    zeros = (0,) * len(allv)
    by_rank = [set() for _ in range(k + 1)]
    if k >= 1:
        by_rank[1].add((T.unit, zeros, None))
    letters = []
    for name, m in ext.symbols:
        base, zs = split_symbol(name)
        extra = [0] * len(allv)
        for z in zs:
            extra[vpos[z]] = 1
        letters.append((name, m, tuple(extra), x in zs))
    changed = True
    while changed:
        changed = False
        for name, m, extra, has_x in letters:
            img = tau.image[name]
            pools = []
            shapes = _shapes(k, m)
            for shape in shapes:
                pool = [sorted(by_rank[r]) for r in shape]
                if any(not p for p in pool):
                    continue
                for combo in itertools.product(*pool):
                    counts = zeros
                    xrank = m if has_x else None
                    ok = True
                    for el, c, xr in combo:
                        counts = _counts_add(counts, c)
                        if xr is not None:
                            xrank = xr if xrank is None else xrank
                    counts = _counts_add(counts, extra)
                    el = T.compose(img, [c[0] for c in combo])
                    entry = (el, counts, xrank)
                    r = sum(s for s in shape)
                    if entry not in by_rank[r]:
                        by_rank[r].add(entry)
                        changed = True
    return by_rank


def _shapes(total, parts):
    if parts == 0:
        return [()]
    out = []
    for first in range(total + 1):
        for rest in _shapes(total - first, parts - 1):
            out.append((first,) + rest)
    return out


def _compile_qk(self, phi: QK, variables, budget) -> CompiledRecognizer:
    sigma, k = self.sigma, self.k
    Y = tuple(sorted(variables))
    x = phi.var
    if x in Y:
        raise ValueError(f"bound variable {x} collides with a free variable")
    W = tuple(sorted(set(Y) | {x}))
    delta = phi.lang.alphabet
    uncovered = set(sigma.arities()) - set(delta.arities())
    if uncovered:
        raise ValueError(
            f"the quantifier language's alphabet has no letters of arity {sorted(uncovered)}"
        )

    # the language side: syntactic pg-pair of K
    trunc_S = max(k + 1, delta.max_arity, sigma.max_arity)
    syn = syntactic_pgpair(phi.lang, trunc_S, budget=budget, verify=False)
    S = syn.pgpair.preclone
    kappa = syn.morphism.image
    alpha_K = syn.accepting

    # the family side: compile each formula over W; recognizers that share
    # transition tables (a formula and its negation) become one component
    recs = {}
    for d, sub in phi.family:
        recs[d] = self.compile(sub, W, budget)
    order = sorted(recs)
    comp_key = lambda a: (id(a.transitions), a.n_states, a.var_state)
    distinct = []
    comp_of = {}
    for d in order:
        key = comp_key(recs[d].automaton)
        for i, a in enumerate(distinct):
            if comp_key(a) == key:
                comp_of[d] = i
                break
        else:
            comp_of[d] = len(distinct)
            distinct.append(recs[d].automaton)
    joint, tuples = _product_many(distinct)
    finals_in = [
        frozenset(
            i
            for i, s in enumerate(tuples)
            if s[comp_of[d]] in recs[d].automaton.finals
        )
        for d in order
    ]
    joint, finals_out = minimize(joint, finals_in)
    F_delta = dict(zip(order, finals_out))

    # simultaneous recognizer: transformation pg-pair of the joint automaton
    ext_W = extend_alphabet(sigma, W)
    trunc_T = max(k + 1, sigma.max_arity)
    res_T = transformation_pgpair(joint, trunc_T, budget=budget)
    T0 = res_T.pgpair.preclone
    tau0 = res_T.morphism
    P0 = {
        d: frozenset(
            el
            for el in T0.sort(k)
            if apply_transformation(T0, el, joint.var_state) in F_delta[d]
        )
        for d in order
    }

    # exact image sets and the determinism check
    by_rank = _image_closure(T0, tau0, ext_W, k, Y, x)
    ones = (1,) * len(W)
    y_only = tuple(0 if v == x else 1 for v in sorted(W))
    valid_Wx = set()
    valid_Y = set()
    arity_delta = {n: sorted(delta.by_arity(n)) for n in delta.arities()}
    for el, counts, xrank in by_rank[k]:
        if counts == ones:
            valid_Wx.add(el)
            if xrank is not None:
                holding = [d for d in arity_delta.get(xrank, []) if el in P0[d]]
                if len(holding) != 1:
                    raise DeterminismViolation(
                        f"family not deterministic: image with x at a rank-"
                        f"{xrank} node lies in {holding}",
                        satisfied=holding,
                    )
        if counts == y_only:
            valid_Y.add(el)

    # quotient by the joint syntactic congruence of all distinguished subsets
    extra = [P0[d] for d in order[1:]] + [frozenset(valid_Wx), frozenset(valid_Y)]
    blocks = syntactic_congruence(T0, k, P0[order[0]], extra_sets=extra)
    T, proj = preclone_quotient(T0, blocks, verify=False)
    tau = Morphism(ext_W, T, {name: proj[el] for name, el in tau0.image.items()})
    P = {d: frozenset(proj[e] for e in P0[d]) for d in order}
    valid_Y = frozenset(proj[e] for e in valid_Y)

    # generators gamma(sigma, Z) = (F_{sigma,Z}, tau(sigma, Z))
    ext_Y = extend_alphabet(sigma, Y)
    bp = BlockProduct(S, T, k, trunc=max(k, sigma.max_arity))
    gen_keys = {}
    default = {
        n: syn.pgpair.generators_of_rank(n)[0] for n in delta.arities()
    }
    for name, n in ext_Y.symbols:
        base, zs = split_symbol(name)
        with_x = tau.image[ext_symbol(base, set(zs) | {x})]

        def f_value(c, n=n, with_x=with_x):
            w = T.plug(c.u, c.k1, T.compose(with_x, c.v), c.k2)
            holding = [d for d in arity_delta.get(n, []) if w in P[d]]
            if len(holding) == 1:
                return kappa[holding[0]]
            return default[n]

        gen_keys[name] = bp.make(f_value, tau.image[name])

    carrier_pg = bp.carrier_pgpair(
        [gen_keys[name] for name, _ in ext_Y.symbols], budget, eval_cap=k
    )
    carrier = carrier_pg.preclone
    image = {
        name: carrier.lookup(ext_Y.arity[name], gen_keys[name])
        for name, _ in ext_Y.symbols
    }
    gamma = Morphism(ext_Y, carrier, image)

    D0 = Context(T.unit, 0, (T.unit,) * k, 0)
    d0_idx = bp.ctx_index[k][D0]
    accepting = frozenset(
        el for el in carrier.sort(k) if carrier.key(el)[0][d0_idx] in alpha_K
    )
    valid = frozenset(
        el for el in carrier.sort(k) if carrier.key(el)[1] in valid_Y
    )
    accepting = accepting & valid

    aut = _carrier_automaton(carrier, gamma, accepting, k, ext_Y)
    tau_Y = Morphism(ext_Y, T, {name: tau.image[name] for name, _ in ext_Y.symbols})
    return CompiledRecognizer(
        carrier_pg, gamma, accepting, valid, k, Y, sigma, ext_Y, aut, tau=tau_Y,
    )


def _carrier_automaton(carrier, gamma, accepting, k, ext) -> TreeAutomaton:
    """A DFTA over the extended alphabet simulating carrier evaluation.

    States are the carrier elements of rank <= k plus a sink for rank
    overflow (combinations no rank-k tree produces).
    """
    elements = [el for n in range(k + 1) for el in carrier.sort(n)]
    idx = {el: i for i, el in enumerate(elements)}
    sink = len(elements)
    n_states = sink + 1
    transitions = {}
    for name, m in ext.symbols:
        img = gamma.image[name]
        table = {}
        for combo in itertools.product(range(n_states), repeat=m):
            if any(c == sink for c in combo):
                table[combo] = sink
                continue
            els = [elements[c] for c in combo]
            if sum(e[0] for e in els) > k:
                table[combo] = sink
                continue
            table[combo] = idx[carrier.compose(img, els)]
        transitions[name] = table
    var_state = tuple(idx[carrier.unit] for _ in range(k))
    finals = frozenset(idx[el] for el in accepting)
    return minimize(
        TreeAutomaton(ext, k, n_states, var_state, transitions, finals)
    )


# ---------------------------------------------------------------------------
# the compiler


class Compiler:
    def __init__(self, sigma: RankedAlphabet, k: int, budget=DEFAULT_BUDGET):
        self.sigma = sigma
        self.k = k
        self.budget = budget
        self._cache = {}

    def compile(self, phi, variables, budget=None) -> CompiledRecognizer:
        budget = budget or self.budget
        variables = tuple(sorted(variables))
        missing = free_vars(phi) - set(variables)
        if missing:
            raise ValueError(f"free variables {sorted(missing)} not in {variables}")
        key = (phi, variables)
        got = self._cache.get(key)
        if got is None:
            got = self._compile(phi, variables, budget)
            self._cache[key] = got
        return got

    def _compile(self, phi, variables, budget):
        if isinstance(phi, ATOMS) or isinstance(phi, (TrueF, FalseF)):
            return compile_atomic(phi, self.sigma, variables, self.k, budget)
        if isinstance(phi, Not):
            return _negate(self.compile(phi.sub, variables, budget))
        if isinstance(phi, Or):
            return _combine(
                self.compile(phi.left, variables, budget),
                self.compile(phi.right, variables, budget),
                True,
                budget,
            )
        if isinstance(phi, And):
            return _combine(
                self.compile(phi.left, variables, budget),
                self.compile(phi.right, variables, budget),
                False,
                budget,
            )
        if isinstance(phi, QK):
            return _compile_qk(self, phi, variables, budget)
        raise TypeError(f"not a formula: {phi!r}")


def compile_formula(phi, sigma: RankedAlphabet, variables, k: int,
                    budget=DEFAULT_BUDGET, trunc=None) -> CompiledRecognizer:
    """Compile a formula over ``sigma`` with free variables in ``variables``.

    ``trunc``, when given, must be at least k+1 (contexts need that much
    room); the pipeline itself works at the minimal sound truncations per
    stage, so larger values only assert feasibility.
    """
    if trunc is not None and trunc < k + 1:
        raise RankOverflow(f"truncation {trunc} below k+1 = {k + 1}")
    return Compiler(sigma, k, budget).compile(phi, variables)


# ---------------------------------------------------------------------------
# the equivalence harness


@dataclass
class EquivalenceReport:
    checked: int
    accepted: int
    mismatches: list  # of (tree, interpretation)

    @property
    def ok(self):
        return not self.mismatches

    def summary(self):
        verdict = "PASS" if self.ok else f"FAIL ({len(self.mismatches)} mismatches)"
        return f"checked {self.checked} structures, {self.accepted} accepted: {verdict}"


def check_equivalence(phi, rec: CompiledRecognizer, max_nv: int) -> EquivalenceReport:
    """Compare satisfaction against recognizer membership, exhaustively."""
    checked = accepted = 0
    mismatches = []
    for t, lam, s in structures(rec.sigma, rec.variables, rec.rank, max_nv):
        want = satisfies(t, lam, phi)
        got = membership(rec, s)
        checked += 1
        accepted += 1 if want else 0
        if want != got:
            mismatches.append((t, lam))
    return EquivalenceReport(checked, accepted, mismatches)
