"""Rank-truncated finitary preclones.

Elements are handles ``(rank, index)`` into per-rank tables; every
preclone carries a truncation bound R and rejects compositions whose
result rank would exceed it.  Concrete families (transformations of an
automaton's state set, direct products, quotients, generated
sub-preclones, loaded dumps) share one interned-table representation and
differ only in their raw composition rule on keys.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import BudgetExceeded, NotACongruence, ParseError, RankOverflow
from .trees import RankedAlphabet, RankedTree

El = tuple  # (rank, index)

DEFAULT_BUDGET = 100_000


class FinitaryPreclone:
    """A truncated preclone over interned element keys.

    ``compose_raw(fkey, frank, [(gkey, grank), ...]) -> key`` supplies the
    semantics; results are looked up in the interned tables, so the sorts
    must be composition-closed within the truncation.
    """

    def __init__(self, trunc, compose_raw, describe=None):
        if trunc < 1:
            raise ValueError("truncation must be at least 1 (the unit's rank)")
        self.trunc = trunc
        self._compose_raw = compose_raw
        self._describe = describe or (lambda key, rank: str(key))
        self._keys = [[] for _ in range(trunc + 1)]
        self._index = [{} for _ in range(trunc + 1)]
        self._memo = {}
        self.unit = None

    # -- element bookkeeping ------------------------------------------------

    def intern(self, rank, key) -> El:
        if rank > self.trunc:
            raise RankOverflow(f"rank {rank} above truncation {self.trunc}")
        tbl = self._index[rank]
        i = tbl.get(key)
        if i is None:
            i = len(self._keys[rank])
            tbl[key] = i
            self._keys[rank].append(key)
        return (rank, i)

    def lookup(self, rank, key):
        i = self._index[rank].get(key)
        return None if i is None else (rank, i)

    def key(self, el: El):
        return self._keys[el[0]][el[1]]

    def sort(self, n):
        """All elements of rank n, in interning order."""
        return [(n, i) for i in range(len(self._keys[n]))]

    def sort_size(self, n):
        return len(self._keys[n])

    def elements(self):
        for n in range(self.trunc + 1):
            yield from self.sort(n)

    def size(self):
        return sum(len(ks) for ks in self._keys)

    def describe(self, el: El) -> str:
        return self._describe(self.key(el), el[0])

    def set_unit(self, el: El):
        if el[0] != 1:
            raise ValueError("unit must have rank 1")
        self.unit = el

    # -- composition ----------------------------------------------------------

    def compose(self, f: El, gs) -> El:
        """f . (g_1 + ... + g_n); n must equal rank(f), result within trunc."""
        gs = tuple(gs)
        if f[0] != len(gs):
            raise ValueError(f"width mismatch: rank {f[0]} vs {len(gs)} arguments")
        m = sum(g[0] for g in gs)
        if m > self.trunc:
            raise RankOverflow(f"composition result rank {m} above truncation {self.trunc}")
        memo_key = (f, gs)
        got = self._memo.get(memo_key)
        if got is not None:
            return got
        key = self._compose_raw(
            self.key(f), f[0], [(self.key(g), g[0]) for g in gs]
        )
        el = self.lookup(m, key)
        if el is None:
            raise ValueError(
                f"composition left the carrier (rank {m}); sorts are not closed"
            )
        self._memo[memo_key] = el
        return el

    def plug(self, u: El, k1: int, x: El, k2: int) -> El:
        """u . (k1 units + x + k2 units)."""
        return self.compose(u, (self.unit,) * k1 + (x,) + (self.unit,) * k2)

    # -- bulk enumeration -----------------------------------------------------

    def tuple_shapes(self, width, max_total=None):
        """All rank vectors of a given width with total rank <= max_total."""
        cap = self.trunc if max_total is None else max_total
        return _compositions_upto(cap, width)

    def iter_tuples(self, width, total=None):
        """All argument tuples of the given width (total rank bound trunc)."""
        for ranks in self.tuple_shapes(width, total):
            pools = [self.sort(r) for r in ranks]
            if any(not p for p in pools):
                continue
            yield from itertools.product(*pools)

    def iter_compositions(self):
        """Yield (f, gs) over every composition defined within trunc."""
        for n in range(self.trunc + 1):
            for f in self.sort(n):
                for gs in self.iter_tuples(n):
                    yield f, gs


def _compositions_upto(total, parts):
    out = []

    def rec(prefix, remaining, left):
        if left == 0:
            out.append(tuple(prefix))
            return
        for v in range(remaining + 1):
            prefix.append(v)
            rec(prefix, remaining - v, left - 1)
            prefix.pop()

    rec([], total, parts)
    return out


def close_under_composition(pre: FinitaryPreclone, budget=DEFAULT_BUDGET):
    """Close the interned sorts under composition, single slot at a time.

    By the preclone axioms any simultaneous composition factors into
    single-slot steps whose intermediate ranks stay within the truncation
    when rank-0 arguments are substituted first, so this reaches the full
    generated sub-preclone.
    """
    work = list(pre.elements())
    seen = set(work)
    pos = 0
    while pos < len(work):
        e = work[pos]
        pos += 1
        snapshot = list(pre.elements())
        for other in snapshot:
            for head, arg in ((e, other), (other, e)):
                n = head[0]
                if n == 0:
                    continue
                m = n - 1 + arg[0]
                if m > pre.trunc:
                    continue
                for slot in range(n):
                    args = (pre.unit,) * slot + (arg,) + (pre.unit,) * (n - 1 - slot)
                    got = _compose_maybe_new(pre, head, args)
                    if got not in seen:
                        seen.add(got)
                        work.append(got)
                        if pre.size() > budget:
                            raise BudgetExceeded(
                                f"closure exceeded {budget} elements"
                            )
    return pre


def _compose_maybe_new(pre: FinitaryPreclone, f, gs):
    m = sum(g[0] for g in gs)
    key = pre._compose_raw(pre.key(f), f[0], [(pre.key(g), g[0]) for g in gs])
    return pre.intern(m, key)


def close_for_evaluation(pre: FinitaryPreclone, cap, budget=DEFAULT_BUDGET):
    """Close the sorts under compositions whose result rank is <= cap.

    Bottom-up evaluation of rank-k trees only ever composes an element
    (a generator, at worst of the maximal arity) with arguments whose
    ranks sum to at most k; closing under exactly those keeps carriers
    small where the full closure would materialize every high-rank
    composite.  Heads range over all interned elements, arguments over
    the rank-<=cap sorts.
    """
    while True:
        size_before = pre.size()
        for f in list(pre.elements()):
            for ranks in _compositions_upto(cap, f[0]):
                pools = [pre.sort(r) for r in ranks]
                if any(not p for p in pools):
                    continue
                for gs in itertools.product(*pools):
                    _compose_maybe_new(pre, f, gs)
        if pre.size() > budget:
            raise BudgetExceeded(f"evaluation closure exceeded {budget} elements")
        if pre.size() == size_before:
            return pre


@dataclass
class PgPair:
    """A preclone together with a distinguished generating set."""

    preclone: FinitaryPreclone
    generators: list  # of El

    def generators_of_rank(self, n):
        return [g for g in self.generators if g[0] == n]


@dataclass
class Morphism:
    """A rank-preserving map from an alphabet into a preclone.

    Extension to trees is homomorphic: variables evaluate to the unit and
    a node composes its symbol's image with the children's images.
    """

    alphabet: RankedAlphabet
    target: FinitaryPreclone
    image: dict  # symbol name -> El

    def __post_init__(self):
        arity = self.alphabet.arity
        for name, el in self.image.items():
            if arity[name] != el[0]:
                raise ValueError(f"morphism does not preserve rank at {name}")

    def __call__(self, name):
        return self.image[name]

    def eval(self, t: RankedTree) -> El:
        if t.is_var():
            return self.target.unit
        imgs = [self.eval(c) for c in t.children]
        return self.target.compose(self.image[t.label], imgs)


def compose_p(S: FinitaryPreclone, f: El, gs) -> El:
    """Composition as a free function (see FinitaryPreclone.compose)."""
    return S.compose(f, gs)


# ---------------------------------------------------------------------------
# transformation preclones


def _transformation_compose(fkey, frank, gkeys):
    n_states, ftable = fkey
    widths = [g[1] for g in gkeys]
    m = sum(widths)
    out = []
    for combo in itertools.product(range(n_states), repeat=m):
        vals = []
        pos = 0
        for (gkey, grank) in gkeys:
            _, gtable = gkey
            idx = 0
            for q in combo[pos : pos + grank]:
                idx = idx * n_states + q
            vals.append(gtable[idx])
            pos += grank
        idx = 0
        for q in vals:
            idx = idx * n_states + q
        out.append(ftable[idx])
    return (n_states, tuple(out))


def transformation_key(n_states, arity, fn):
    """Intern key of the arity-ary transformation given by fn(args)->state."""
    table = tuple(
        fn(combo) for combo in itertools.product(range(n_states), repeat=arity)
    )
    return (n_states, table)


def identity_key(n_states):
    return (n_states, tuple(range(n_states)))


def _new_transformation_preclone(n_states, trunc, describe=None):
    pre = FinitaryPreclone(trunc, _transformation_compose, describe)
    pre.set_unit(pre.intern(1, identity_key(n_states)))
    return pre


def apply_transformation(pre: FinitaryPreclone, el: El, args) -> int:
    """Apply a transformation element to a state tuple."""
    n_states, table = pre.key(el)
    idx = 0
    for q in args:
        idx = idx * n_states + q
    return table[idx]


@dataclass
class TransformationResult:
    pgpair: PgPair
    morphism: Morphism
    automaton: object


def transformation_pgpair(automaton, trunc, budget=DEFAULT_BUDGET,
                          eval_cap=None) -> TransformationResult:
    """The preclone associated with an automaton, truncated at ``trunc``.

    Generators are the transformations induced by the symbols; the
    morphism maps each symbol to its transformation.  ``trunc`` must be at
    least the maximal arity so the generators fit.  With ``eval_cap`` the
    carrier is closed only under compositions with result rank <= the cap
    (enough to evaluate trees of that rank) instead of the full closure.
    """
    if trunc < automaton.alphabet.max_arity:
        raise RankOverflow("truncation below the maximal symbol arity")
    n = automaton.n_states
    pre = _new_transformation_preclone(n, trunc)
    image = {}
    gens = []
    for name, m in automaton.alphabet.symbols:
        table = automaton.transitions[name]
        key = transformation_key(n, m, lambda combo, t=table: t[combo])
        el = pre.intern(m, key)
        image[name] = el
        if el not in gens:
            gens.append(el)
    if eval_cap is None:
        close_under_composition(pre, budget)
    else:
        close_for_evaluation(pre, eval_cap, budget)
    morphism = Morphism(automaton.alphabet, pre, image)
    return TransformationResult(PgPair(pre, gens), morphism, automaton)


def accepting_elements(res: TransformationResult, finals=None):
    """Rank-k elements whose value on the variable states is final."""
    a = res.automaton
    F = a.finals if finals is None else finals
    pre = res.pgpair.preclone
    return {
        el
        for el in pre.sort(a.rank)
        if apply_transformation(pre, el, a.var_state) in F
    }


def morphism_eval(phi: Morphism, t: RankedTree) -> El:
    return phi.eval(t)


# ---------------------------------------------------------------------------
# T_exists and T_p


def t_exists(trunc) -> PgPair:
    """Sorts {or_n, true_n} on the Booleans; or_0 is the constant false.

    Element (n, 0) is or_n and (n, 1) is true_n.  Generated by or_2,
    true_0 and false_0; the unit is or_1.
    """

    def describe(key, rank):
        _, table = key
        if all(v == 1 for v in table):
            return f"true_{rank}"
        return f"false_{rank}" if rank == 0 else f"or_{rank}"

    pre = _new_transformation_preclone(2, trunc, describe)
    for n in range(trunc + 1):
        pre.intern(n, transformation_key(2, n, lambda c: 1 if any(c) else 0))
        pre.intern(n, transformation_key(2, n, lambda c: 1))
    gens = [(2, 0), (0, 1), (0, 0)]  # or_2, true_0, false_0
    return PgPair(pre, gens)


def t_mod(p, trunc) -> PgPair:
    """Sort n is {f_{n,r}: 0 <= r < p}, f_{n,r}(xs) = sum(xs) + r mod p.

    Element (n, r) is f_{n,r}.  Generated by the constant 0, the unary
    increment and the binary sum; the unit is f_{1,0}.
    """
    if p < 2:
        raise ValueError("p must be at least 2")

    def describe(key, rank):
        _, table = key
        return f"f_{rank},{table[0] if table else 0}"

    pre = _new_transformation_preclone(p, trunc, describe)
    for n in range(trunc + 1):
        for r in range(p):
            pre.intern(
                n, transformation_key(p, n, lambda c, r=r: (sum(c) + r) % p)
            )
    gens = [(0, 0), (1, 1), (2, 0)]
    return PgPair(pre, gens)


# ---------------------------------------------------------------------------
# products, tupling, generated sub-pg-pairs, quotients


def direct_product(factors) -> FinitaryPreclone:
    """Componentwise product; sorts are cartesian products of the factors'."""
    factors = list(factors)
    truncs = {S.trunc for S in factors}
    if len(truncs) != 1:
        raise ValueError("factors must share one truncation")
    trunc = truncs.pop()

    def compose_raw(fkey, frank, gkeys):
        out = []
        for i, S in enumerate(factors):
            f_el = fkey[i]
            g_els = [gkey[i] for gkey, _ in gkeys]
            out.append(S.compose(f_el, g_els))
        return tuple(out)

    def describe(key, rank):
        return "(" + ",".join(factors[i].describe(key[i]) for i in range(len(factors))) + ")"

    pre = FinitaryPreclone(trunc, compose_raw, describe)
    for n in range(trunc + 1):
        for combo in itertools.product(*(S.sort(n) for S in factors)):
            pre.intern(n, tuple(combo))
    pre.set_unit(pre.lookup(1, tuple(S.unit for S in factors)))
    return pre


def product_component(prod: FinitaryPreclone, el: El, i: int) -> El:
    return prod.key(el)[i]


def target_tupling(morphisms, prod: FinitaryPreclone) -> Morphism:
    """Tuple morphisms with a common source into their direct product."""
    alph = morphisms[0].alphabet
    if any(m.alphabet != alph for m in morphisms):
        raise ValueError("tupled morphisms must share the source alphabet")
    image = {}
    for name, _ in alph.symbols:
        key = tuple(m.image[name] for m in morphisms)
        el = prod.lookup(alph.arity[name], key)
        if el is None:
            raise ValueError("tupled image missing from the product carrier")
        image[name] = el
    return Morphism(alph, prod, image)


def sub_pgpair_generated(S: FinitaryPreclone, gens, budget=DEFAULT_BUDGET,
                         eval_cap=None) -> PgPair:
    """The sub-pg-pair of S generated by ``gens`` (plus the unit).

    Elements of the result are keyed by the parent's element handles.
    ``eval_cap`` restricts the closure to evaluation compositions, as in
    transformation_pgpair.
    """

    def compose_raw(fkey, frank, gkeys):
        return S.compose(fkey, [g for g, _ in gkeys])

    def describe(key, rank):
        return S.describe(key)

    pre = FinitaryPreclone(S.trunc, compose_raw, describe)
    pre.set_unit(pre.intern(1, S.unit))
    sub_gens = []
    for g in gens:
        el = pre.intern(g[0], g)
        if el not in sub_gens:
            sub_gens.append(el)
    if eval_cap is None:
        close_under_composition(pre, budget)
    else:
        close_for_evaluation(pre, eval_cap, budget)
    return PgPair(pre, sub_gens)


def quotient(S: FinitaryPreclone, blocks_by_rank, verify=True, budget=None):
    """Quotient by a per-rank partition; returns (Q, projection dict).

    ``blocks_by_rank[n]`` lists the blocks (lists of element handles) of
    sort n.  With verify=True a single pass over all compositions checks
    that the block of f.(gs) depends only on the blocks involved, raising
    NotACongruence with a witness otherwise.
    """
    proj = {}
    for n, blocks in enumerate(blocks_by_rank):
        seen = set()
        for b, block in enumerate(blocks):
            for el in block:
                if el[0] != n:
                    raise ValueError("partition relates elements of unequal rank")
                if el in proj:
                    raise ValueError("partition blocks overlap")
                proj[el] = (n, b)
                seen.add(el)
        if len(seen) != S.sort_size(n):
            raise ValueError(f"partition does not cover sort {n}")

    if verify:
        sig = {}
        count = 0
        for f, gs in S.iter_compositions():
            key = (proj[f], tuple(proj[g] for g in gs))
            got = proj[S.compose(f, gs)]
            prev = sig.get(key)
            if prev is None:
                sig[key] = got
            elif prev != got:
                raise NotACongruence(
                    "composition does not respect the partition",
                    witness=(f, gs),
                )
            count += 1
            if budget is not None and count > budget:
                raise BudgetExceeded("congruence verification budget exceeded")

    reps = [dict() for _ in range(S.trunc + 1)]
    for el, cls in proj.items():
        reps[cls[0]].setdefault(cls[1], el)

    def compose_raw(fkey, frank, gkeys):
        f_rep = reps[frank][fkey]
        g_reps = [reps[grank][gkey] for gkey, grank in gkeys]
        return proj[S.compose(f_rep, g_reps)][1]

    def describe(key, rank):
        return "[" + S.describe(reps[rank][key]) + "]"

    Q = FinitaryPreclone(S.trunc, compose_raw, describe)
    for n, blocks in enumerate(blocks_by_rank):
        for b in range(len(blocks)):
            Q.intern(n, b)
    Q.set_unit((1, proj[S.unit][1]))
    return Q, proj


def identity_partition(S: FinitaryPreclone):
    return [[[el] for el in S.sort(n)] for n in range(S.trunc + 1)]


def total_partition(S: FinitaryPreclone):
    return [[S.sort(n)] if S.sort_size(n) else [] for n in range(S.trunc + 1)]


# ---------------------------------------------------------------------------
# axiom checking


@dataclass
class AxiomReport:
    unit_checked: int = 0
    assoc_checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def summary(self):
        status = "OK" if self.ok else f"{len(self.violations)} VIOLATIONS"
        return (
            f"unit instances: {self.unit_checked}, "
            f"associativity instances: {self.assoc_checked}, {status}"
        )


def _assoc_instance(S, f, gs, hs):
    """Both sides of the associativity axiom for one triple."""
    lhs = S.compose(S.compose(f, gs), hs)
    parts = []
    pos = 0
    for g in gs:
        sub = hs[pos : pos + g[0]]
        pos += g[0]
        parts.append(S.compose(g, sub))
    rhs = S.compose(f, parts)
    return lhs, rhs


def check_axioms(S: FinitaryPreclone, mode="exhaustive", samples=1000, seed=0):
    """Check unit laws and associativity; list every violation found.

    Exhaustive mode walks all composable triples within the truncation;
    sampled mode draws ``samples`` random triples with the given seed.
    """
    report = AxiomReport()
    for el in S.elements():
        if S.compose(S.unit, (el,)) != el:
            report.violations.append(("unit-left", el))
        if S.compose(el, (S.unit,) * el[0]) != el:
            report.violations.append(("unit-right", el))
        report.unit_checked += 1

    if mode == "exhaustive":
        for f, gs in S.iter_compositions():
            m = sum(g[0] for g in gs)
            for hs in S.iter_tuples(m):
                lhs, rhs = _assoc_instance(S, f, gs, hs)
                if lhs != rhs:
                    report.violations.append(("assoc", f, gs, hs))
                report.assoc_checked += 1
    elif mode == "sampled":
        import random

        rng = random.Random(seed)
        comps = list(S.iter_compositions())
        if comps:
            for _ in range(samples):
                f, gs = comps[rng.randrange(len(comps))]
                m = sum(g[0] for g in gs)
                tuples = list(S.iter_tuples(m))
                hs = tuples[rng.randrange(len(tuples))]
                lhs, rhs = _assoc_instance(S, f, gs, hs)
                if lhs != rhs:
                    report.violations.append(("assoc", f, gs, hs))
                report.assoc_checked += 1
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return report


# ---------------------------------------------------------------------------
# dump format


def el_token(el: El) -> str:
    return f"{el[0]}.{el[1]}"


def parse_el(tok: str) -> El:
    r, _, i = tok.partition(".")
    return (int(r), int(i))


def dump_preclone(S: FinitaryPreclone, generators=None, result_cap=None) -> str:
    """Text dump: sorts, unit, descriptions, generators, all compositions.

    ``result_cap`` limits the listed compositions to those with result rank
    below the cap (for carriers closed only for evaluation).
    """
    lines = [f"trunc {S.trunc}"]
    for n in range(S.trunc + 1):
        lines.append(f"sort {n} {S.sort_size(n)}")
    lines.append(f"unit {el_token(S.unit)}")
    for el in S.elements():
        lines.append(f"desc {el_token(el)} {S.describe(el)}")
    for g in generators or []:
        lines.append(f"gen {el_token(g)}")
    for f, gs in S.iter_compositions():
        if result_cap is not None and sum(g[0] for g in gs) > result_cap:
            continue
        h = S.compose(f, gs)
        args = " ".join(el_token(g) for g in gs)
        lines.append(f"comp {len(gs)}: {el_token(f)} ({args}) -> {el_token(h)}")
    return "\n".join(lines) + "\n"


def load_preclone(text: str):
    """Rebuild a table-backed preclone from a dump; returns (S, generators)."""
    trunc = None
    sizes = {}
    unit = None
    descs = {}
    gens = []
    table = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kw = parts[0]
        try:
            if kw == "trunc":
                trunc = int(parts[1])
            elif kw == "sort":
                sizes[int(parts[1])] = int(parts[2])
            elif kw == "unit":
                unit = parse_el(parts[1])
            elif kw == "desc":
                descs[parse_el(parts[1])] = " ".join(parts[2:])
            elif kw == "gen":
                gens.append(parse_el(parts[1]))
            elif kw == "comp":
                f = parse_el(parts[2])
                close_i = parts.index("->")
                args = tuple(
                    parse_el(p.strip("()"))
                    for p in parts[3:close_i]
                    if p.strip("()")
                )
                table[(f, args)] = parse_el(parts[close_i + 1])
            else:
                raise ParseError(f"unknown keyword {kw!r}")
        except (IndexError, ValueError) as exc:
            raise ParseError(f"dump line {lineno}: {exc}") from None
    if trunc is None or unit is None:
        raise ParseError("dump missing trunc or unit line")

    def compose_raw(fkey, frank, gkeys):
        entry = table.get((fkey, tuple(g for g, _ in gkeys)))
        if entry is None:
            raise ParseError(f"dump has no composition for {fkey} {gkeys}")
        return entry

    def describe(key, rank):
        return descs.get(key, str(key))

    S = FinitaryPreclone(trunc, compose_raw, describe)
    for n in range(trunc + 1):
        for i in range(sizes.get(n, 0)):
            S.intern(n, (n, i))
    S.set_unit((1, unit[1]))
    return S, gens
