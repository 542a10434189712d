"""Formula syntax trees and the purely syntactic machinery built on them.

Formulas are kept in negation normal form: negation occurs only on atoms.
Propositional variables and atoms share one countable name space, so a
"variable" is simply an atom that happens to be bound by a fixpoint binder.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import InputError, MucalcError


class SyntaxError_(MucalcError):
    """A structural precondition on a formula failed (not clean, not a
    subformula, ...)."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

class Formula:
    """Base class of all formula nodes. Instances are immutable and hashable."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class NegAtom(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Diamond(Formula):
    body: Formula


@dataclass(frozen=True, slots=True)
class Box(Formula):
    body: Formula


@dataclass(frozen=True, slots=True)
class Mu(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, slots=True)
class Nu(Formula):
    var: str
    body: Formula


TOP = Top()
BOT = Bottom()

Binder = (Mu, Nu)
Literal = (Atom, NegAtom, Top, Bottom)


# ---------------------------------------------------------------------------
# Basic traversals
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def free_names(f: Formula) -> frozenset:
    """Names with a free occurrence in f (atoms and unbound variables alike)."""
    if isinstance(f, (Atom, NegAtom)):
        return frozenset({f.name})
    if isinstance(f, (Top, Bottom)):
        return frozenset()
    if isinstance(f, (Or, And)):
        return free_names(f.left) | free_names(f.right)
    if isinstance(f, (Diamond, Box)):
        return free_names(f.body)
    if isinstance(f, Binder):
        return free_names(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


@lru_cache(maxsize=None)
def bound_names(f: Formula) -> frozenset:
    """Names carried by some binder occurrence in f."""
    if isinstance(f, Literal):
        return frozenset()
    if isinstance(f, (Or, And)):
        return bound_names(f.left) | bound_names(f.right)
    if isinstance(f, (Diamond, Box)):
        return bound_names(f.body)
    if isinstance(f, Binder):
        return bound_names(f.body) | {f.var}
    raise TypeError(f"not a formula: {f!r}")


def children(f: Formula) -> tuple:
    if isinstance(f, (Or, And)):
        return (f.left, f.right)
    if isinstance(f, (Diamond, Box)):
        return (f.body,)
    if isinstance(f, Binder):
        return (f.body,)
    return ()


def subformulas(f: Formula) -> tuple:
    """Unique subformulas of f in preorder (first occurrence wins)."""
    seen = []
    seen_set = set()

    def go(g):
        if g not in seen_set:
            seen_set.add(g)
            seen.append(g)
        for c in children(g):
            go(c)

    go(f)
    return tuple(seen)


def is_subformula(f: Formula, g: Formula) -> bool:
    """f occurs as a subtree of g (structural identity)."""
    if f == g:
        return True
    return any(is_subformula(f, c) for c in children(g))


def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in children(f))


def _binder_count(f: Formula) -> int:
    n = 1 if isinstance(f, Binder) else 0
    return n + sum(_binder_count(c) for c in children(f))


def is_tidy(f: Formula) -> bool:
    return not (free_names(f) & bound_names(f))


def is_clean(f: Formula) -> bool:
    """Tidy, and every bound variable has exactly one binder occurrence."""
    if not is_tidy(f):
        return False
    counts = {}

    def go(g):
        if isinstance(g, Binder):
            counts[g.var] = counts.get(g.var, 0) + 1
        for c in children(g):
            go(c)

    go(f)
    return all(n == 1 for n in counts.values())


# ---------------------------------------------------------------------------
# Alpha-equivalence and canonical renaming
# ---------------------------------------------------------------------------

def alpha_key(f: Formula):
    """Structural key identifying formulas up to renaming of bound variables.

    Bound occurrences are replaced by their binder's nesting depth
    (a De Bruijn level), free names are kept verbatim.
    """

    def go(g, env, depth):
        if isinstance(g, Atom):
            lvl = env.get(g.name)
            return ("b", lvl) if lvl is not None else ("f", g.name)
        if isinstance(g, NegAtom):
            lvl = env.get(g.name)
            return ("nb", lvl) if lvl is not None else ("nf", g.name)
        if isinstance(g, Top):
            return ("top",)
        if isinstance(g, Bottom):
            return ("bot",)
        if isinstance(g, Or):
            return ("or", go(g.left, env, depth), go(g.right, env, depth))
        if isinstance(g, And):
            return ("and", go(g.left, env, depth), go(g.right, env, depth))
        if isinstance(g, Diamond):
            return ("dia", go(g.body, env, depth))
        if isinstance(g, Box):
            return ("box", go(g.body, env, depth))
        if isinstance(g, Mu):
            return ("mu", go(g.body, {**env, g.var: depth}, depth + 1))
        if isinstance(g, Nu):
            return ("nu", go(g.body, {**env, g.var: depth}, depth + 1))
        raise TypeError(f"not a formula: {g!r}")

    return go(f, {}, 0)


def alpha_eq(f: Formula, g: Formula) -> bool:
    return f == g or alpha_key(f) == alpha_key(g)


def canonicalize(f: Formula) -> Formula:
    """Canonical alphabetic variant: bound variables renamed to x1, x2, ...
    in preorder, skipping names free in f.

    The result is tidy and clean; alpha-equivalent inputs map to identical
    outputs.
    """
    return canonicalize_with_renaming(f)[0]


def canonicalize_with_renaming(f: Formula):
    """Like canonicalize, but also returns the (old, new) binder renamings in
    preorder."""
    avoid = free_names(f)
    counter = itertools.count(1)
    renamings = []

    def fresh():
        while True:
            name = f"x{next(counter)}"
            if name not in avoid:
                return name

    def go(g, ren):
        if isinstance(g, Atom):
            return Atom(ren.get(g.name, g.name))
        if isinstance(g, NegAtom):
            return NegAtom(ren.get(g.name, g.name))
        if isinstance(g, (Top, Bottom)):
            return g
        if isinstance(g, Or):
            return Or(go(g.left, ren), go(g.right, ren))
        if isinstance(g, And):
            return And(go(g.left, ren), go(g.right, ren))
        if isinstance(g, Diamond):
            return Diamond(go(g.body, ren))
        if isinstance(g, Box):
            return Box(go(g.body, ren))
        if isinstance(g, Binder):
            new = fresh()
            renamings.append((g.var, new))
            body = go(g.body, {**ren, g.var: new})
            return Mu(new, body) if isinstance(g, Mu) else Nu(new, body)
        raise TypeError(f"not a formula: {g!r}")

    return go(f, {}), renamings


# ---------------------------------------------------------------------------
# Substitution and negation
# ---------------------------------------------------------------------------

_fresh_counter = itertools.count(1)


def _fresh_name(avoid) -> str:
    while True:
        name = f"_w{next(_fresh_counter)}"
        if name not in avoid:
            return name


def substitute(f: Formula, x: str, repl: Formula) -> Formula:
    """f with each free occurrence of x replaced by repl.

    Negative occurrences (NegAtom(x)) receive negate(repl), keeping the
    result in negation normal form. Binders in f capturing free names of
    repl are renamed apart.
    """
    repl_free = free_names(repl)

    def go(g):
        if x not in free_names(g):
            return g
        if isinstance(g, Atom):
            return repl if g.name == x else g
        if isinstance(g, NegAtom):
            return negate(repl) if g.name == x else g
        if isinstance(g, Or):
            return Or(go(g.left), go(g.right))
        if isinstance(g, And):
            return And(go(g.left), go(g.right))
        if isinstance(g, Diamond):
            return Diamond(go(g.body))
        if isinstance(g, Box):
            return Box(go(g.body))
        if isinstance(g, Binder):
            body, var = g.body, g.var
            if var in repl_free:
                var2 = _fresh_name(repl_free | free_names(body) | bound_names(body) | {x})
                body = substitute(body, var, Atom(var2))
                var = var2
            body = go(body)
            return Mu(var, body) if isinstance(g, Mu) else Nu(var, body)
        raise TypeError(f"not a formula: {g!r}")

    return go(f)


def negate(f: Formula) -> Formula:
    """The definable negation operator; result is in negation normal form.

    On binders: ~(eta x. phi) = dual-eta x. ~(phi[!x/x]), so the recursion
    variable stays positive in the dual.
    """
    if isinstance(f, Atom):
        return NegAtom(f.name)
    if isinstance(f, NegAtom):
        return Atom(f.name)
    if isinstance(f, Top):
        return BOT
    if isinstance(f, Bottom):
        return TOP
    if isinstance(f, Or):
        return And(negate(f.left), negate(f.right))
    if isinstance(f, And):
        return Or(negate(f.left), negate(f.right))
    if isinstance(f, Diamond):
        return Box(negate(f.body))
    if isinstance(f, Box):
        return Diamond(negate(f.body))
    if isinstance(f, Mu):
        return Nu(f.var, negate(substitute(f.body, f.var, NegAtom(f.var))))
    if isinstance(f, Nu):
        return Mu(f.var, negate(substitute(f.body, f.var, NegAtom(f.var))))
    raise TypeError(f"not a formula: {f!r}")


def implies(a: Formula, b: Formula) -> Formula:
    """a -> b, desugared to NNF."""
    return Or(negate(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    """a <-> b, desugared to NNF."""
    return And(implies(a, b), implies(b, a))


def conjoin(formulas) -> Formula:
    """Left-nested conjunction; Top for the empty list."""
    formulas = list(formulas)
    if not formulas:
        return TOP
    acc = formulas[0]
    for g in formulas[1:]:
        acc = And(acc, g)
    return acc


def disjoin(formulas) -> Formula:
    """Left-nested disjunction; Bottom for the empty list."""
    formulas = list(formulas)
    if not formulas:
        return BOT
    acc = formulas[0]
    for g in formulas[1:]:
        acc = Or(acc, g)
    return acc


# ---------------------------------------------------------------------------
# Fragment classification (continuity)
# ---------------------------------------------------------------------------

class Fragment(enum.Enum):
    IN_CON_X = "IN_CON_X"
    IN_COCON_X = "IN_COCON_X"
    IN_BOTH = "IN_BOTH"
    NEITHER = "NEITHER"


def is_continuous_mucalc(f: Formula) -> bool:
    """Membership in the continuous modal mu-calculus: every mu-binder body is
    continuous in its variable, every nu-binder body cocontinuous."""
    if isinstance(f, Literal):
        return True
    if isinstance(f, (Or, And, Diamond, Box)):
        return all(is_continuous_mucalc(c) for c in children(f))
    if isinstance(f, Mu):
        return in_con(f.body, frozenset({f.var}))
    if isinstance(f, Nu):
        return in_cocon(f.body, frozenset({f.var}))
    raise TypeError(f"not a formula: {f!r}")


def in_con(f: Formula, xs: frozenset) -> bool:
    """f is in the syntactic fragment of formulas continuous in xs."""
    xs = frozenset(xs)
    if not (xs & free_names(f)):
        return is_continuous_mucalc(f)
    if isinstance(f, Atom):
        return f.name in xs
    if isinstance(f, (Or, And)):
        return in_con(f.left, xs) and in_con(f.right, xs)
    if isinstance(f, Diamond):
        return in_con(f.body, xs)
    if isinstance(f, Mu):
        return in_con(f.body, xs | {f.var})
    return False


def in_cocon(f: Formula, xs: frozenset) -> bool:
    """f is in the syntactic fragment of formulas cocontinuous in xs."""
    xs = frozenset(xs)
    if not (xs & free_names(f)):
        return is_continuous_mucalc(f)
    if isinstance(f, Atom):
        return f.name in xs
    if isinstance(f, (Or, And)):
        return in_cocon(f.left, xs) and in_cocon(f.right, xs)
    if isinstance(f, Box):
        return in_cocon(f.body, xs)
    if isinstance(f, Nu):
        return in_cocon(f.body, xs | {f.var})
    return False


def classify_fragment(f: Formula, xs) -> tuple:
    """(Fragment verdict wrt xs, membership flag for the continuous calculus)."""
    xs = frozenset(xs)
    con = in_con(f, xs)
    cocon = in_cocon(f, xs)
    if con and cocon:
        verdict = Fragment.IN_BOTH
    elif con:
        verdict = Fragment.IN_CON_X
    elif cocon:
        verdict = Fragment.IN_COCON_X
    else:
        verdict = Fragment.NEITHER
    return verdict, is_continuous_mucalc(f)


# ---------------------------------------------------------------------------
# FL-closure
# ---------------------------------------------------------------------------

class ClosureSet:
    """Finite set of formulas, canonicalized up to renaming of bound
    variables, closed under the subformula/unfolding rules (and optionally
    under the negation operator)."""

    def __init__(self, formulas, neg_closed: bool):
        by_key = {}
        for g in formulas:
            by_key.setdefault(alpha_key(g), g)
        from .textio import print_formula  # local import to avoid a cycle
        self.formulas = tuple(sorted(by_key.values(), key=print_formula))
        self._keys = frozenset(by_key)
        self.neg_closed = neg_closed

    def __contains__(self, f: Formula) -> bool:
        return alpha_key(f) in self._keys

    def __iter__(self):
        return iter(self.formulas)

    def __len__(self):
        return len(self.formulas)

    def __eq__(self, other):
        return isinstance(other, ClosureSet) and self._keys == other._keys

    def __hash__(self):
        return hash(self._keys)

    @property
    def keys(self):
        return self._keys


def _closure_successors(f: Formula):
    if isinstance(f, NegAtom):
        yield Atom(f.name)
    elif isinstance(f, (Or, And)):
        yield f.left
        yield f.right
    elif isinstance(f, (Diamond, Box)):
        yield f.body
    elif isinstance(f, Binder):
        yield substitute(f.body, f.var, f)


def fl_closure(formulas, with_negations: bool = False) -> ClosureSet:
    """Least superset of the (tidied) input closed under the closure rules;
    with_negations additionally closes under the negation operator."""
    out = {}
    work = [canonicalize(g) for g in formulas]
    while work:
        g = work.pop()
        key = alpha_key(g)
        if key in out:
            continue
        out[key] = g
        for succ in _closure_successors(g):
            work.append(canonicalize(succ))
        if with_negations:
            work.append(canonicalize(negate(g)))
    return ClosureSet(out.values(), neg_closed=with_negations)


def is_fl_closed(sigma) -> bool:
    """All closure-rule successors of members are again members."""
    keys = {alpha_key(g) for g in sigma}
    for g in sigma:
        for succ in _closure_successors(g):
            if alpha_key(canonicalize(succ)) not in keys:
                return False
    return True


# ---------------------------------------------------------------------------
# Dependency order, expansion, closure identity
# ---------------------------------------------------------------------------

class SubformulaIndex:
    """Per-formula bookkeeping for a fixed clean formula: subformulas, the
    dependency order on bound variables, and the fixed enumeration that
    respects it (ties broken by leftmost binder occurrence)."""

    def __init__(self, xi: Formula):
        if not is_clean(xi):
            raise SyntaxError_("formula is not clean; canonicalize it first")
        self.xi = xi
        self.subs = subformulas(xi)
        self.delta = {}
        self.eta = {}
        binder_pos = {}
        for pos, g in enumerate(self.subs):
            if isinstance(g, Binder):
                self.delta[g.var] = g.body
                self.eta[g.var] = "mu" if isinstance(g, Mu) else "nu"
                binder_pos[g.var] = pos
        bvs = list(self.delta)

        base = set()
        for x in bvs:
            for y in bvs:
                if x == y:
                    continue
                if (is_subformula(self.delta[x], self.delta[y])
                        and self.delta[x] != self.delta[y]
                        and y in free_names(self.delta[x])):
                    base.add((x, y))
        # transitive closure
        order = set(base)
        changed = True
        while changed:
            changed = False
            for (a, b) in list(order):
                for (c, d) in list(order):
                    if b == c and (a, d) not in order:
                        order.add((a, d))
                        changed = True
        if any((x, x) in order for x in bvs):
            raise SyntaxError_("dependency order is not irreflexive")
        self.order = frozenset(order)

        # Kahn topological sort, tie-broken by leftmost binder occurrence.
        remaining = set(bvs)
        enum = []
        while remaining:
            avail = [x for x in remaining
                     if not any((y, x) in order for y in remaining if y != x)]
            avail.sort(key=binder_pos.__getitem__)
            pick = avail[0]
            enum.append(pick)
            remaining.remove(pick)
        self.bound_vars = tuple(enum)

    def less(self, x: str, y: str) -> bool:
        return (x, y) in self.order

    def is_free_subformula(self, f: Formula) -> bool:
        """f occurs in xi and every free name of f is free in xi."""
        if f not in self.subs:
            return False
        return free_names(f) <= free_names(self.xi)

    def expansion(self, f: Formula) -> Formula:
        """exp_xi(f): substitute each bound variable by its fixpoint formula,
        in enumeration order."""
        if f not in self.subs:
            raise SyntaxError_("not a subformula of the indexed formula")
        out = f
        for x in self.bound_vars:
            eta = Mu if self.eta[x] == "mu" else Nu
            out = substitute(out, x, eta(x, self.delta[x]))
        return out

    def alternation_free(self) -> bool:
        """Comparable bound variables share their fixpoint type."""
        return all(self.eta[x] == self.eta[y] for (x, y) in self.order)


@dataclass
class ClosureIdentityReport:
    equal: bool
    closure_size: int
    only_in_closure: tuple
    only_in_expansions: tuple


def closure_identity_check(xi: Formula) -> ClosureIdentityReport:
    """Compare the FL-closure of xi with the set of expansions of its
    subformulas, up to alpha-equivalence.

    Negative literals count their atom as a subformula: the closure has an
    explicit !p -> p rule, which the classical statement of the identity
    (where literals are atomic) does not cover."""
    xi = canonicalize(xi)
    idx = SubformulaIndex(xi)
    closure = fl_closure([xi])
    expansions = {alpha_key(canonicalize(idx.expansion(g))): canonicalize(idx.expansion(g))
                  for g in idx.subs}
    for g in idx.subs:
        # a negated atom is never a bound variable, so its atom expands
        # to itself
        if isinstance(g, NegAtom):
            expansions[alpha_key(Atom(g.name))] = Atom(g.name)
    ckeys = closure.keys
    ekeys = set(expansions)
    only_c = tuple(g for g in closure if alpha_key(g) not in ekeys)
    only_e = tuple(g for k, g in sorted(expansions.items(), key=str) if k not in ckeys)
    return ClosureIdentityReport(
        equal=(ckeys == ekeys),
        closure_size=len(closure),
        only_in_closure=only_c,
        only_in_expansions=only_e,
    )


def ingest(f: Formula) -> Formula:
    """Tidy a formula on its way into the library, raising on non-formulas."""
    if not isinstance(f, Formula):
        raise InputError(f"not a formula: {f!r}")
    return f if is_clean(f) else canonicalize(f)
