"""Block products of preclones and pg-pairs.

A rank-n element of S []_k T is a pair (F, f): f in T_n and F a total
table from the n-ary contexts of T's sort k into S_n.  Composition
rewrites each context of the result into one context for F and one for
each argument's table; the index bookkeeping (slicing the context tuple
by argument ranks, inserting the unit at the active slot) is validated
eagerly because it is the most error-prone part of the construction.

Block elements are plain pairs ``(F, f)`` with F a tuple of S-element
handles indexed by the deterministic context enumeration order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BudgetExceeded, RankOverflow
from .preclone import (
    DEFAULT_BUDGET,
    FinitaryPreclone,
    Morphism,
    PgPair,
    close_under_composition,
)
from .syntactic import Context, enumerate_contexts
from .trees import RankedTree, factor_at, rank as tree_rank


class BlockProduct:
    """S []_k T, with elements materialized on demand.

    ``trunc`` bounds the rank of block elements; T must reach rank k+1
    (for contexts) and S must reach ``trunc``.
    """

    def __init__(self, S: FinitaryPreclone, T: FinitaryPreclone, k: int, trunc=None):
        self.S = S
        self.T = T
        self.k = k
        self.trunc = min(S.trunc, T.trunc) if trunc is None else trunc
        if T.trunc < k + 1:
            raise RankOverflow("T must be truncated at rank >= k+1 for contexts")
        if S.trunc < self.trunc:
            raise RankOverflow("S must be truncated at least at the product's bound")
        self.contexts = [enumerate_contexts(T, k, n) for n in range(self.trunc + 1)]
        self.ctx_index = [
            {c: i for i, c in enumerate(cs)} for cs in self.contexts
        ]

    # -- element helpers -----------------------------------------------------

    def n_contexts(self, n):
        return len(self.contexts[n])

    def rank_of(self, ff):
        return ff[1][0]

    def unit_key(self):
        return ((self.S.unit,) * self.n_contexts(1), self.T.unit)

    def make(self, fvalues, f):
        """Build (F, f) from a context->S-element function or sequence."""
        n = f[0]
        if callable(fvalues):
            F = tuple(fvalues(c) for c in self.contexts[n])
        else:
            F = tuple(fvalues)
        if len(F) != self.n_contexts(n):
            raise ValueError("F table does not match the context enumeration")
        for s_el in F:
            if s_el[0] != n:
                raise ValueError("F values must have the element's rank")
        return (F, f)

    def F_at(self, ff, c: Context):
        F, f = ff
        return F[self.ctx_index[f[0]][c]]

    # -- composition -----------------------------------------------------------

    def compose(self, ff, ggs):
        """(F,f) . ((G_1,g_1) + ... + (G_n,g_n)) per the context rewrite."""
        F, f = ff
        n = f[0]
        if len(ggs) != n:
            raise ValueError(f"width mismatch: rank {n} vs {len(ggs)} arguments")
        gs = tuple(g for _, g in ggs)
        widths = [g[0] for g in gs]
        m = sum(widths)
        if m > self.trunc:
            raise RankOverflow(f"block element of rank {m} above bound {self.trunc}")
        T = self.T
        fg = T.compose(f, gs)
        Q = []
        for c in self.contexts[m]:
            # slice v by the argument widths; ell_i = total rank of slice i
            vbars = []
            pos = 0
            for w in widths:
                vbars.append(c.v[pos : pos + w])
                pos += w
            ells = [sum(x[0] for x in vb) for vb in vbars]
            gv = tuple(T.compose(gs[i], vbars[i]) for i in range(n))
            outer = Context(c.u, c.k1, gv, c.k2)
            f_val = F[self.ctx_index[n][outer]]
            args = []
            for i in range(n):
                inner = gv[:i] + (T.unit,) + gv[i + 1 :]
                c_i = T.plug(c.u, c.k1, T.compose(f, inner), c.k2)
                p1 = c.k1 + sum(ells[:i])
                p2 = sum(ells[i + 1 :]) + c.k2
                ctx_i = Context(c_i, p1, vbars[i], p2)
                idx = self.ctx_index[widths[i]].get(ctx_i)
                if idx is None:
                    raise RankOverflow(
                        f"derived context missing at rank {widths[i]}: "
                        f"p1={p1} p2={p2}; decomposition of {c}"
                    )
                args.append(ggs[i][0][idx])
            Q.append(self.S.compose(f_val, args))
        return (tuple(Q), fg)

    def eval_tree(self, gamma, t: RankedTree):
        """Homomorphic evaluation of a tree whose labels index ``gamma``."""
        if t.is_var():
            return self.unit_key()
        kids = [self.eval_tree(gamma, c) for c in t.children]
        return self.compose(gamma[t.label], kids)

    # -- carrier as a preclone --------------------------------------------------

    def carrier_pgpair(self, generators, budget=DEFAULT_BUDGET,
                       eval_cap=None) -> PgPair:
        """Generated sub-preclone of the block product, as element tables.

        ``eval_cap`` restricts the closure to compositions with result rank
        below the cap (enough for evaluating trees of that rank).
        """

        def compose_raw(fkey, frank, gkeys):
            return self.compose(fkey, [g for g, _ in gkeys])

        def describe(key, rank):
            return f"(F,{self.T.describe(key[1])})"

        pre = FinitaryPreclone(self.trunc, compose_raw, describe)
        pre.set_unit(pre.intern(1, self.unit_key()))
        gens = []
        for key in generators:
            el = pre.intern(self.rank_of(key), key)
            if el not in gens:
                gens.append(el)
        if eval_cap is None:
            close_under_composition(pre, budget)
        else:
            from .preclone import close_for_evaluation

            close_for_evaluation(pre, eval_cap, budget)
        return PgPair(pre, gens)


def second_projection(carrier: FinitaryPreclone):
    """The map (F, f) -> f on a materialized block carrier."""

    def project(el):
        return carrier.key(el)[1]

    return project


def block_product_pg(pgS: PgPair, pgT: PgPair, k: int, generators="all",
                     trunc=None, budget=DEFAULT_BUDGET):
    """Block product of pg-pairs: closure of the chosen generators.

    With ``generators="all"`` the generating set is every (F, b) with b a
    T-generator of rank n and F valued in the rank-n S-generators; a list
    of block element keys selects a subset instead (the compiler always
    passes the explicit images of its extended alphabet).
    Returns (BlockProduct, PgPair of the carrier).
    """
    import itertools

    bp = BlockProduct(pgS.preclone, pgT.preclone, k, trunc)
    if generators == "all":
        gen_keys = []
        for n in range(bp.trunc + 1):
            a_n = pgS.generators_of_rank(n)
            b_n = pgT.generators_of_rank(n)
            if not b_n:
                continue
            n_ctx = bp.n_contexts(n)
            count = len(a_n) ** n_ctx * len(b_n)
            if count > budget:
                raise BudgetExceeded(
                    f"{count} generators at rank {n} exceed budget {budget}"
                )
            for b in b_n:
                for F in itertools.product(a_n, repeat=n_ctx):
                    gen_keys.append((F, b))
    else:
        gen_keys = list(generators)
    carrier = bp.carrier_pgpair(gen_keys, budget)
    return bp, carrier


def generator_count(pgS: PgPair, pgT: PgPair, bp: BlockProduct, n: int) -> int:
    """|A_n|^|I_{k,n}| * |B_n|, the size of the full generator set at rank n."""
    return len(pgS.generators_of_rank(n)) ** bp.n_contexts(n) * len(
        pgT.generators_of_rank(n)
    )


# ---------------------------------------------------------------------------
# restricted block product S []_k^{T'} T


@dataclass
class RestrictedBlockProduct:
    """Elements of S []_k T' whose second component lies in a sub-preclone T.

    The carrier is combinatorially large (|S_n| ** |I'_{k,n}| * |T_n| per
    rank), so it is kept lazy: membership, composition and counting walk
    the full product's machinery.
    """

    bp: BlockProduct  # over (S, T', k)
    t_elements: list  # per rank, the T'-elements forming the sub-preclone T

    def contains(self, ff):
        F, f = ff
        return f in self.t_elements[f[0]]

    def compose(self, ff, ggs):
        for x in (ff,) + tuple(ggs):
            if not self.contains(x):
                raise ValueError("element outside the restricted product")
        out = self.bp.compose(ff, ggs)
        assert self.contains(out)  # sub-preclone closure
        return out

    def carrier_size(self, n) -> int:
        return len(self.bp.S.sort(n)) ** self.bp.n_contexts(n) * len(
            self.t_elements[n]
        )

    def iter_carrier(self, n):
        import itertools

        sorts = self.bp.S.sort(n)
        for f in self.t_elements[n]:
            for F in itertools.product(sorts, repeat=self.bp.n_contexts(n)):
                yield (F, f)


def restricted_block_product(S, Tfull, t_elements, k, trunc=None):
    """S []_k^{T'} T for T the sub-preclone listed in ``t_elements``."""
    bp = BlockProduct(S, Tfull, k, trunc)
    return RestrictedBlockProduct(bp, [list(els) for els in t_elements])


def alpha_context_morphism(src: RestrictedBlockProduct, dst: BlockProduct, C: Context):
    """The morphism S []_k^{T'} T -> S []_n T determined by a context C.

    C is an n-ary context over T' in sort k; the image of (F, f) is
    (F^C, f) where F^C reads off F at the context obtained by stacking C
    around the target context.  Satisfies F^C(1, 0, n-units, 0) = F(C).
    dst must be the block product of S and T at level n = width of C.
    """
    Tfull = src.bp.T
    n = len(C.v)
    if dst.k != n:
        raise ValueError("destination level must equal the context width")

    def apply(ff):
        F, f = ff
        m = f[0]
        out = []
        for D in dst.contexts[m]:
            r, p1, s, p2 = D.u, D.k1, D.v, D.k2
            # split C.v into the first p1, middle n-p1-p2, last p2 components
            vbar1 = C.v[:p1]
            vmid = C.v[p1 : n - p2]
            vbar2 = C.v[n - p2 :]
            q1 = sum(x[0] for x in vbar1)
            q2 = sum(x[0] for x in vbar2)
            r_ins = Tfull.compose(r, vbar1 + (Tfull.unit,) + vbar2)
            u2 = Tfull.plug(C.u, C.k1, r_ins, C.k2)
            # s . vmid, componentwise over the middle slices
            sv = []
            pos = 0
            for s_i in s:
                w = s_i[0]
                sv.append(Tfull.compose(s_i, vmid[pos : pos + w]))
                pos += w
            D2 = Context(u2, C.k1 + q1, tuple(sv), q2 + C.k2)
            idx = src.bp.ctx_index[m].get(D2)
            if idx is None:
                raise RankOverflow(f"stacked context missing: {D2}")
            out.append(F[idx])
        return (tuple(out), f)

    return apply


# ---------------------------------------------------------------------------
# relabeling evaluation (the two-route identity)


def relabel(t: RankedTree, D: Context, gamma, tau: Morphism, bp: BlockProduct):
    """Relabel each NV node of t with the S-element its table picks at D.

    gamma maps each letter to a block element key (F_sigma, b_sigma); tau
    is the second-component morphism into T.  The relabelled tree keeps
    t's shape and variable leaves; NV labels become S-element handles.
    """
    T = bp.T
    n = tree_rank(t)
    if D not in bp.ctx_index[n]:
        raise ValueError("context does not match the tree's rank")

    def label_for(path):
        f_tree, r1, g_sub, r3 = factor_at(t, path)
        sigma = g_sub.label
        m = len(g_sub.children)
        r2 = tree_rank(g_sub)
        vbar1 = D.v[:r1]
        vbar2 = D.v[r1 : r1 + r2]
        vbar3 = D.v[r1 + r2 :]
        p1 = sum(x[0] for x in vbar1)
        p3 = sum(x[0] for x in vbar3)
        tf = tau.eval(f_tree)
        c = T.plug(D.u, D.k1, T.compose(tf, vbar1 + (T.unit,) + vbar3), D.k2)
        hv = []
        pos = 0
        for child in g_sub.children:
            w = tree_rank(child)
            hv.append(T.compose(tau.eval(child), vbar2[pos : pos + w]))
            pos += w
        ctx = Context(c, D.k1 + p1, tuple(hv), p3 + D.k2)
        F_sigma, _ = gamma[sigma]
        idx = bp.ctx_index[m].get(ctx)
        if idx is None:
            raise RankOverflow(f"derived context missing while relabeling: {ctx}")
        return F_sigma[idx]

    def walk(s, path):
        if s.is_var():
            return s
        kids = tuple(walk(c, path + (i,)) for i, c in enumerate(s.children))
        return RankedTree(label_for(path), kids)

    return walk(t, ())


def eval_labels(S: FinitaryPreclone, t: RankedTree):
    """Evaluate a tree whose NV labels are S-element handles."""
    if t.is_var():
        return S.unit
    return S.compose(t.label, [eval_labels(S, c) for c in t.children])


def eval_two_ways(bp: BlockProduct, gamma, tau: Morphism, t: RankedTree, D: Context):
    """(table route, relabeling route) for the value of phi(t)'s table at D.

    Route one evaluates t homomorphically in the block product and reads
    the first component's table at D; route two relabels t through D and
    evaluates the resulting S-labelled tree.  The two agree.
    """
    Q_t, _ = bp.eval_tree(gamma, t)
    via_table = Q_t[bp.ctx_index[tree_rank(t)][D]]
    via_relabel = eval_labels(bp.S, relabel(t, D, gamma, tau, bp))
    return via_table, via_relabel
