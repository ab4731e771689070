"""The quantifier logic on ranked trees.

Formulas of rank k over an alphabet are built from the atomic predicates,
Boolean connectives, and generalized quantifiers Q_K carrying a rank-k
tree language K over a letter alphabet Delta together with a family of
formulas, one per Delta-letter, that is deterministic with respect to the
bound variable.  Satisfaction of Q_K relabels every NV node by the unique
letter whose formula holds there (the characteristic tree) and tests
membership of the result in K.

First-order variables denote NV nodes; variable leaves are place markers
and are never pointed at.  The unit tree has no NV nodes, so formulas
with free variables cannot be interpreted on it; sentences can.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .automata import TreeAutomaton, boolean_alphabet, k_exists, k_mod
from .errors import DeterminismViolation, ParseError
from .trees import (
    RankedAlphabet,
    RankedTree,
    nv_nodes,
    rank as tree_rank,
    subtree_at,
    vars_left_of,
)


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class PSym:
    sym: str
    x: str


@dataclass(frozen=True)
class Less:
    x: str
    y: str


@dataclass(frozen=True)
class Succ:
    i: int
    x: str
    y: str


@dataclass(frozen=True)
class Root:
    x: str


@dataclass(frozen=True)
class Max:
    i: int
    j: int
    x: str


@dataclass(frozen=True)
class LeftJ:
    j: int
    x: str


@dataclass(frozen=True)
class RightJ:
    j: int
    x: str


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class FalseF:
    pass


@dataclass(frozen=True)
class Not:
    sub: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class QK:
    """Quantifier node: language, bound variable, family (delta, formula)."""

    name: str
    lang: TreeAutomaton  # over Delta, rank k; compared by identity
    var: str
    family: tuple  # ((delta_name, Formula), ...) covering all of Delta

    def formulas(self):
        return dict(self.family)


TRUE = TrueF()
FALSE = FalseF()

ATOMS = (PSym, Less, Succ, Root, Max, LeftJ, RightJ)


def free_vars(phi) -> frozenset:
    if isinstance(phi, PSym):
        return frozenset({phi.x})
    if isinstance(phi, (Less, Succ)):
        return frozenset({phi.x, phi.y})
    if isinstance(phi, (Root, Max, LeftJ, RightJ)):
        return frozenset({phi.x})
    if isinstance(phi, (TrueF, FalseF)):
        return frozenset()
    if isinstance(phi, Not):
        return free_vars(phi.sub)
    if isinstance(phi, (Or, And)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, QK):
        out = frozenset()
        for _, sub in phi.family:
            out |= free_vars(sub)
        return out - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def subformula_count(phi) -> int:
    if isinstance(phi, Not):
        return 1 + subformula_count(phi.sub)
    if isinstance(phi, (Or, And)):
        return 1 + subformula_count(phi.left) + subformula_count(phi.right)
    if isinstance(phi, QK):
        return 1 + sum(subformula_count(f) for _, f in phi.family)
    return 1


# ---------------------------------------------------------------------------
# satisfaction


def satisfies(t: RankedTree, lam: dict, phi) -> bool:
    """(t, lam) |= phi, with lam mapping free variables to NV node paths."""
    fv = free_vars(phi)
    missing = fv - set(lam)
    if missing:
        raise ValueError(f"interpretation misses free variables {sorted(missing)}")
    nv = set(nv_nodes(t))
    for x in fv:
        if lam[x] not in nv:
            raise ValueError(f"{x} is not interpreted at an NV node")
    return _sat(t, lam, phi)


def _sat(t, lam, phi):
    if isinstance(phi, TrueF):
        return True
    if isinstance(phi, FalseF):
        return False
    if isinstance(phi, PSym):
        return subtree_at(t, lam[phi.x]).label == phi.sym
    if isinstance(phi, Less):
        px, py = lam[phi.x], lam[phi.y]
        return len(py) > len(px) and py[: len(px)] == px
    if isinstance(phi, Succ):
        px, py = lam[phi.x], lam[phi.y]
        return py == px + (phi.i - 1,)
    if isinstance(phi, Root):
        return lam[phi.x] == ()
    if isinstance(phi, Max):
        node = subtree_at(t, lam[phi.x])
        if phi.i > len(node.children):
            return False
        child = node.children[phi.i - 1]
        return child.is_var() and child.label == phi.j
    if isinstance(phi, LeftJ):
        return vars_left_of(t, lam[phi.x]) == phi.j
    if isinstance(phi, RightJ):
        px = lam[phi.x]
        return vars_left_of(t, px) + tree_rank(subtree_at(t, px)) + 1 == phi.j
    if isinstance(phi, Not):
        return not _sat(t, lam, phi.sub)
    if isinstance(phi, Or):
        return _sat(t, lam, phi.left) or _sat(t, lam, phi.right)
    if isinstance(phi, And):
        return _sat(t, lam, phi.left) and _sat(t, lam, phi.right)
    if isinstance(phi, QK):
        bar = characteristic_tree(t, lam, phi.var, phi.lang.alphabet, phi.formulas())
        return phi.lang.accepts(bar)
    raise TypeError(f"not a formula: {phi!r}")


def characteristic_tree(t, lam, x, delta: RankedAlphabet, formulas) -> RankedTree:
    """Relabel each NV node by the unique letter whose formula holds there.

    Raises DeterminismViolation unless exactly one letter of the node's
    rank applies.
    """
    by_rank = {}
    for name, m in delta.symbols:
        by_rank.setdefault(m, []).append(name)
    labels = {}
    for path in nv_nodes(t):
        m = len(subtree_at(t, path).children)
        candidates = by_rank.get(m, [])
        lam_v = dict(lam)
        lam_v[x] = path
        holding = [d for d in candidates if _sat(t, lam_v, formulas[d])]
        if len(holding) != 1:
            raise DeterminismViolation(
                f"family is not deterministic at node {path}: {holding}",
                node=path,
                satisfied=holding,
            )
        labels[path] = holding[0]

    def rebuild(s, path):
        if s.is_var():
            return s
        kids = tuple(rebuild(c, path + (i,)) for i, c in enumerate(s.children))
        return RankedTree(labels[path], kids)

    return rebuild(t, ())


def check_deterministic(delta: RankedAlphabet, x, family, sigma: RankedAlphabet,
                        k: int, max_nv: int):
    """Exhaustively test determinism of a family on trees with <= max_nv nodes.

    Checks, for every tree, interpretation of the other free variables and
    placement of x, that exactly one letter of the node's rank applies.
    Returns (True, None) or (False, witness) with the first violating
    (tree, interpretation, node, holding letters).
    """
    from .trees import enumerate_trees

    formulas = dict(family)
    arity = delta.arity
    others = sorted(
        set().union(frozenset(), *(free_vars(f) for f in formulas.values())) - {x}
    )
    for t in enumerate_trees(sigma, k, max_nv):
        nvs = nv_nodes(t)
        if not nvs:
            continue
        for assign in itertools.product(nvs, repeat=len(others)):
            lam = dict(zip(others, assign))
            for v in nvs:
                m = len(subtree_at(t, v).children)
                lam_v = dict(lam)
                lam_v[x] = v
                holding = [
                    d
                    for d in sorted(formulas)
                    if arity[d] == m and _sat(t, lam_v, formulas[d])
                ]
                if len(holding) != 1:
                    return False, (t, lam, v, holding)
    return True, None


# ---------------------------------------------------------------------------
# Z-structures


def ext_symbol(name: str, zs) -> str:
    zs = sorted(zs)
    return name if not zs else name + "@" + "@".join(zs)


def split_symbol(ename: str):
    parts = ename.split("@")
    return parts[0], frozenset(parts[1:])


def extend_alphabet(sigma: RankedAlphabet, zs) -> RankedAlphabet:
    """The alphabet whose rank-m letters are (sigma_m letter, subset of zs)."""
    zs = sorted(zs)
    syms = []
    for name, m in sigma.symbols:
        for r in range(len(zs) + 1):
            for combo in itertools.combinations(zs, r):
                syms.append((ext_symbol(name, combo), m))
    return RankedAlphabet(tuple(syms))


def mk_structure(t: RankedTree, lam: dict) -> RankedTree:
    """Encode (t, lam) as a tree whose labels carry the variables sitting there."""
    at_node = {}
    for z, path in lam.items():
        at_node.setdefault(path, []).append(z)

    def walk(s, path):
        if s.is_var():
            return s
        kids = tuple(walk(c, path + (i,)) for i, c in enumerate(s.children))
        return RankedTree(ext_symbol(s.label, at_node.get(path, [])), kids)

    out = walk(t, ())
    for z, path in lam.items():
        if subtree_at(t, path).is_var():
            raise ValueError(f"{z} must sit at an NV node")
    return out


def destructure(t: RankedTree, zs=None):
    """Decode a structure into (base tree, interpretation).

    With ``zs`` given, checks that each of those variables occurs exactly
    once.
    """
    lam = {}

    def walk(s, path):
        if s.is_var():
            return s
        base, here = split_symbol(s.label)
        for z in here:
            if z in lam:
                raise ValueError(f"variable {z} occurs twice")
            lam[z] = path
        kids = tuple(walk(c, path + (i,)) for i, c in enumerate(s.children))
        return RankedTree(base, kids)

    base_tree = walk(t, ())
    if zs is not None and set(lam) != set(zs):
        raise ValueError(f"structure carries {sorted(lam)}, expected {sorted(zs)}")
    return base_tree, lam


def is_structure(t: RankedTree, zs) -> bool:
    try:
        destructure(t, zs)
        return True
    except ValueError:
        return False


def structures(sigma, zs, k, max_nv):
    """All (tree, lam, structure) triples with the tree's NV count bounded."""
    from .trees import enumerate_trees

    zs = sorted(zs)
    for t in enumerate_trees(sigma, k, max_nv):
        nvs = nv_nodes(t)
        if len(zs) > 0 and not nvs:
            continue
        for assign in itertools.product(nvs, repeat=len(zs)):
            lam = dict(zip(zs, assign))
            yield t, lam, mk_structure(t, lam)


# ---------------------------------------------------------------------------
# substitution and rewritings


_fresh_counter = itertools.count(1)


def fresh_var(base="z"):
    return f"{base}${next(_fresh_counter)}"


def substitute_var(chi, q: str, p: str):
    """chi[q/p]: substitute q for the free occurrences of p, avoiding capture."""
    if p == q:
        return chi
    if isinstance(chi, PSym):
        return PSym(chi.sym, q if chi.x == p else chi.x)
    if isinstance(chi, Less):
        return Less(q if chi.x == p else chi.x, q if chi.y == p else chi.y)
    if isinstance(chi, Succ):
        return Succ(chi.i, q if chi.x == p else chi.x, q if chi.y == p else chi.y)
    if isinstance(chi, Root):
        return Root(q if chi.x == p else chi.x)
    if isinstance(chi, Max):
        return Max(chi.i, chi.j, q if chi.x == p else chi.x)
    if isinstance(chi, LeftJ):
        return LeftJ(chi.j, q if chi.x == p else chi.x)
    if isinstance(chi, RightJ):
        return RightJ(chi.j, q if chi.x == p else chi.x)
    if isinstance(chi, (TrueF, FalseF)):
        return chi
    if isinstance(chi, Not):
        return Not(substitute_var(chi.sub, q, p))
    if isinstance(chi, Or):
        return Or(substitute_var(chi.left, q, p), substitute_var(chi.right, q, p))
    if isinstance(chi, And):
        return And(substitute_var(chi.left, q, p), substitute_var(chi.right, q, p))
    if isinstance(chi, QK):
        if chi.var == p:  # p is bound here; no free occurrences inside
            return chi
        if chi.var == q:  # rename the binder first to avoid capture
            z = fresh_var(chi.var.split("$")[0])
            fam = tuple(
                (d, substitute_var(f, z, chi.var)) for d, f in chi.family
            )
            chi = QK(chi.name, chi.lang, z, fam)
        fam = tuple((d, substitute_var(f, q, p)) for d, f in chi.family)
        return QK(chi.name, chi.lang, chi.var, fam)
    raise TypeError(f"not a formula: {chi!r}")


def rank_test(z: str, n: int, sigma: RankedAlphabet):
    """The formula 'z sits at a rank-n node': a disjunction of letter atoms."""
    letters = sigma.by_arity(n)
    out = FALSE
    for i, name in enumerate(letters):
        out = PSym(name, z) if i == 0 else Or(out, PSym(name, z))
    return out


def tilde_substitute(chi, x: str, formulas: dict, delta: RankedAlphabet,
                     sigma: RankedAlphabet):
    """Rewrite a formula over Delta into one over Sigma through a family.

    A letter atom P_delta(z) becomes formulas[delta] with z substituted for
    x, guarded by 'z has delta's rank'.  The guard is needed for the
    substitution to commute with characteristic-tree relabeling: a family
    formula may well hold at a node whose rank differs from its letter's,
    but the relabeled node never carries a wrong-rank letter.  Requires
    that neither x nor any free variable of the family formulas is free in
    chi.
    """
    banned = {x}
    for f in formulas.values():
        banned |= free_vars(f)
    clash = free_vars(chi) & banned
    if clash:
        raise ValueError(f"variable capture: {sorted(clash)} free in the host formula")
    arity = delta.arity
    return _tilde(chi, x, formulas, arity, sigma)


def _tilde(chi, x, formulas, arity, sigma):
    if isinstance(chi, PSym):
        if chi.sym not in formulas:
            raise ValueError(f"letter {chi.sym} not covered by the family")
        body = substitute_var(formulas[chi.sym], chi.x, x)
        return And(rank_test(chi.x, arity[chi.sym], sigma), body)
    if isinstance(chi, ATOMS) or isinstance(chi, (TrueF, FalseF)):
        return chi
    if isinstance(chi, Not):
        return Not(_tilde(chi.sub, x, formulas, arity, sigma))
    if isinstance(chi, Or):
        return Or(
            _tilde(chi.left, x, formulas, arity, sigma),
            _tilde(chi.right, x, formulas, arity, sigma),
        )
    if isinstance(chi, And):
        return And(
            _tilde(chi.left, x, formulas, arity, sigma),
            _tilde(chi.right, x, formulas, arity, sigma),
        )
    if isinstance(chi, QK):
        fam = tuple((d, _tilde(f, x, formulas, arity, sigma)) for d, f in chi.family)
        return QK(chi.name, chi.lang, chi.var, fam)
    raise TypeError(f"not a formula: {chi!r}")


def inverse_literal_image(phi, h: dict, source: RankedAlphabet, target: RankedAlphabet):
    """phi' over ``source`` with (t, lam) |= phi' iff (h(t), lam) |= phi.

    ``h`` maps source letters to target letters, rank-preserving.  Letter
    atoms become disjunctions over preimages; everything else only sees
    the tree's shape and is kept.
    """
    s_ar, t_ar = source.arity, target.arity
    for a, b in h.items():
        if s_ar[a] != t_ar[b]:
            raise ValueError(f"h does not preserve rank at {a}")

    def rec(f):
        if isinstance(f, PSym):
            pre = [a for a in source.names() if h[a] == f.sym]
            out = FALSE
            for i, a in enumerate(pre):
                out = PSym(a, f.x) if i == 0 else Or(out, PSym(a, f.x))
            return out
        if isinstance(f, ATOMS) or isinstance(f, (TrueF, FalseF)):
            return f
        if isinstance(f, Not):
            return Not(rec(f.sub))
        if isinstance(f, Or):
            return Or(rec(f.left), rec(f.right))
        if isinstance(f, And):
            return And(rec(f.left), rec(f.right))
        if isinstance(f, QK):
            return QK(f.name, f.lang, f.var, tuple((d, rec(g)) for d, g in f.family))
        raise TypeError(f"not a formula: {f!r}")

    return rec(phi)


def apply_literal_morphism(t: RankedTree, h: dict) -> RankedTree:
    if t.is_var():
        return t
    return RankedTree(h[t.label], tuple(apply_literal_morphism(c, h) for c in t.children))


# ---------------------------------------------------------------------------
# sugar


def boolean_family(phi, sigma: RankedAlphabet):
    """The family (phi at 1-letters, not phi at 0-letters) over Sigma's arities."""
    fam = []
    for n in sigma.arities():
        fam.append((f"1_{n}", phi))
        fam.append((f"0_{n}", Not(phi)))
    return tuple(fam)


def exists_formula(x, phi, sigma: RankedAlphabet, k: int) -> QK:
    delta = boolean_alphabet(sigma.arities())
    return QK("exists", k_exists(delta, k), x, boolean_family(phi, sigma))


def desugar_mod(p, r, x, phi, sigma: RankedAlphabet, k: int) -> QK:
    delta = boolean_alphabet(sigma.arities())
    return QK(f"mod[{p},{r}]", k_mod(delta, k, p, r), x, boolean_family(phi, sigma))


# ---------------------------------------------------------------------------
# parser


_PUNCT = ["->", "(", ")", "[", "]", "{", "}", ",", ";", ":", ".", "<", "&", "|", "!"]


def _tokenize(text):
    toks = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if text.startswith("->", i):
            toks.append("->")
            i += 2
            continue
        if ch in "()[]{},;:.<&|!":
            toks.append(ch)
            i += 1
            continue
        j = i
        while j < len(text) and (text[j].isalnum() or text[j] in "_@$"):
            j += 1
        if j == i:
            raise ParseError(f"unexpected character {ch!r} at {i}")
        toks.append(text[i:j])
        i = j
    return toks


class _FormulaParser:
    def __init__(self, tokens, sigma, k, langs):
        self.toks = tokens
        self.pos = 0
        self.sigma = sigma
        self.k = k
        self.langs = langs or {}

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of formula")
        self.pos += 1
        return tok

    def expect(self, tok):
        got = self.next()
        if got != tok:
            raise ParseError(f"expected {tok!r}, got {got!r}")
        return got

    def parse(self):
        phi = self.quantified()
        if self.pos != len(self.toks):
            raise ParseError(f"trailing tokens from {self.toks[self.pos]!r}")
        return phi

    def quantified(self):
        phi = self._try_quantifier()
        return phi if phi is not None else self.implies()

    def _try_quantifier(self):
        tok = self.peek()
        if tok == "exists":
            self.next()
            x = self.variable()
            self.expect(".")
            body = self.quantified()
            return exists_formula(x, body, self.sigma, self.k)
        if tok == "mod":
            self.next()
            self.expect("[")
            p = self.integer()
            self.expect(",")
            r = self.integer()
            self.expect("]")
            x = self.variable()
            self.expect(".")
            body = self.quantified()
            if not (p >= 2 and 0 <= r < p):
                raise ParseError(f"bad modulus parameters ({p},{r})")
            return desugar_mod(p, r, x, body, self.sigma, self.k)
        if tok == "Q":
            self.next()
            self.expect("[")
            name = self.next()
            self.expect("]")
            x = self.variable()
            self.expect("{")
            fam = []
            while True:
                d = self.next()
                self.expect(":")
                fam.append((d, self.quantified()))
                sep = self.next()
                if sep == "}":
                    break
                if sep != ";":
                    raise ParseError(f"expected ';' or '}}', got {sep!r}")
                if self.peek() == "}":
                    self.next()
                    break
            lang = self.langs.get(name)
            if lang is None:
                raise ParseError(f"unknown language {name!r}")
            return self._mk_qk(name, lang, x, fam)
        return None

    def _mk_qk(self, name, lang, x, fam):
        if lang.rank != self.k:
            raise ParseError(
                f"language {name} has rank {lang.rank}, formula has rank {self.k}"
            )
        delta_names = set(lang.alphabet.names())
        seen = set()
        for d, _ in fam:
            if d not in delta_names:
                raise ParseError(f"{d!r} is not a letter of {name}'s alphabet")
            if d in seen:
                raise ParseError(f"duplicate family entry for {d!r}")
            seen.add(d)
        missing = delta_names - seen
        if missing:
            raise ParseError(f"family misses letters {sorted(missing)}")
        sig_arities = set(self.sigma.arities())
        delta_arities = set(lang.alphabet.arities())
        if not sig_arities <= delta_arities:
            raise ParseError(
                f"{name}'s alphabet has no letters of arity "
                f"{sorted(sig_arities - delta_arities)}"
            )
        return QK(name, lang, x, tuple(fam))

    def implies(self):
        left = self.disjunction()
        if self.peek() == "->":
            self.next()
            right = self.implies()
            return Or(Not(left), right)
        return left

    def disjunction(self):
        out = self.conjunction()
        while self.peek() == "|":
            self.next()
            out = Or(out, self.conjunction())
        return out

    def conjunction(self):
        out = self.unary()
        while self.peek() == "&":
            self.next()
            out = And(out, self.unary())
        return out

    def unary(self):
        if self.peek() == "!":
            self.next()
            return Not(self.unary())
        phi = self._try_quantifier()  # quantifier body extends maximally right
        return phi if phi is not None else self.atom()

    def integer(self):
        tok = self.next()
        if not tok.isdigit():
            raise ParseError(f"expected an integer, got {tok!r}")
        return int(tok)

    def variable(self):
        tok = self.next()
        if not tok or not (tok[0].isalpha()) or tok in (
            "exists", "mod", "true", "false", "root", "max", "left", "right", "P", "Q",
        ):
            raise ParseError(f"bad variable name {tok!r}")
        return tok

    def atom(self):
        tok = self.peek()
        if tok == "(":
            self.next()
            phi = self.quantified()
            self.expect(")")
            return phi
        if tok == "true":
            self.next()
            return TRUE
        if tok == "false":
            self.next()
            return FALSE
        if tok == "P":
            self.next()
            self.expect("[")
            sym = self.next()
            self.expect("]")
            if sym not in self.sigma.arity:
                raise ParseError(f"unknown symbol {sym!r}")
            self.expect("(")
            x = self.variable()
            self.expect(")")
            return PSym(sym, x)
        if tok == "root":
            self.next()
            self.expect("(")
            x = self.variable()
            self.expect(")")
            return Root(x)
        if tok == "max":
            self.next()
            self.expect("[")
            i = self.integer()
            self.expect(",")
            j = self.integer()
            self.expect("]")
            self.expect("(")
            x = self.variable()
            self.expect(")")
            if not 1 <= i <= self.sigma.max_arity:
                raise ParseError(f"successor index {i} out of range")
            if not 1 <= j <= self.k:
                raise ParseError(f"variable index {j} outside rank {self.k}")
            return Max(i, j, x)
        if tok in ("left", "right"):
            self.next()
            self.expect("[")
            j = self.integer()
            self.expect("]")
            self.expect("(")
            x = self.variable()
            self.expect(")")
            return self._leftright(tok, j, x)
        if tok is not None and tok.startswith("succ_"):
            self.next()
            i = tok[len("succ_"):]
            if not i.isdigit():
                raise ParseError(f"bad successor atom {tok!r}")
            i = int(i)
            if not 1 <= i <= self.sigma.max_arity:
                raise ParseError(f"successor index {i} out of range")
            self.expect("(")
            x = self.variable()
            self.expect(",")
            y = self.variable()
            self.expect(")")
            return Succ(i, x, y)
        # x < y
        x = self.variable()
        self.expect("<")
        y = self.variable()
        return Less(x, y)

    def _leftright(self, kind, j, x):
        k = self.k
        if kind == "left":
            if j == 0:
                if k < 1:
                    raise ParseError("left[0] needs rank >= 1")
                out = Not(LeftJ(1, x))
                for jj in range(2, k + 1):
                    out = And(out, Not(LeftJ(jj, x)))
                return out
            if not 1 <= j <= k:
                raise ParseError(f"left index {j} outside rank {k}")
            return LeftJ(j, x)
        if j == k + 1:
            if k < 1:
                raise ParseError("right[k+1] needs rank >= 1")
            out = Not(RightJ(1, x))
            for jj in range(2, k + 1):
                out = And(out, Not(RightJ(jj, x)))
            return out
        if not 1 <= j <= k:
            raise ParseError(f"right index {j} outside rank {k}")
        return RightJ(j, x)


def _alpha_rename(phi):
    """Give every bound variable a fresh name so substitution never captures."""
    if isinstance(phi, Not):
        return Not(_alpha_rename(phi.sub))
    if isinstance(phi, Or):
        return Or(_alpha_rename(phi.left), _alpha_rename(phi.right))
    if isinstance(phi, And):
        return And(_alpha_rename(phi.left), _alpha_rename(phi.right))
    if isinstance(phi, QK):
        fam = tuple((d, _alpha_rename(f)) for d, f in phi.family)
        z = fresh_var(phi.var.split("$")[0])
        fam = tuple((d, substitute_var(f, z, phi.var)) for d, f in fam)
        return QK(phi.name, phi.lang, z, fam)
    return phi


def parse_formula(text: str, sigma: RankedAlphabet, k: int, langs=None):
    """Parse a formula of rank k over sigma; bound variables are renamed fresh.

    ``langs`` maps quantifier language names to rank-k automata.
    """
    parser = _FormulaParser(_tokenize(text), sigma, k, langs)
    return _alpha_rename(parser.parse())
