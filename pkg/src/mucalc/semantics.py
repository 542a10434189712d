"""Algebraic and game semantics, their cross-validation, and trace checks.

The algebraic side computes meanings by Kleene iteration, which on a finite
lattice coincides with the least/greatest fixpoint. The game side builds the
evaluation game arena over subformula/state positions and solves it with a
recursive attractor-based parity solver. Infinite plays are decided by
max-parity: in an alternation-free formula all variables unfolded infinitely
often in a play share a fixpoint type, so the parity of the maximal
recurring priority determines the winner.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .kripke import KripkeModel
from .syntax import (
    And, Atom, Binder, Bottom, Box, Diamond, Formula, Mu, NegAtom, Nu, Or,
    SubformulaIndex, Top, canonicalize, free_names, subformulas,
)

EXISTS = 0  # player whose wins certify truth
FORALL = 1


# ---------------------------------------------------------------------------
# Algebraic semantics
# ---------------------------------------------------------------------------

def eval_algebraic(f: Formula, model: KripkeModel, env=None, stats=None):
    """The meaning [[f]] as a frozenset of states.

    env maps fixpoint variables opened during recursion to their current
    approximant; atoms not in env fall back to the model valuation (absent
    atoms denote the empty set). stats, if given, is a dict collecting the
    maximal Kleene round count under key "max_rounds".
    """
    states = frozenset(model.states)
    env = dict(env) if env else {}

    # successor map once per call
    succs = {s: [] for s in model.states}
    for (a, b) in model.relation:
        succs[a].append(b)

    def go(g, env):
        if isinstance(g, Atom):
            if g.name in env:
                return env[g.name]
            return model.val(g.name)
        if isinstance(g, NegAtom):
            if g.name in env:
                return states - env[g.name]
            return states - model.val(g.name)
        if isinstance(g, Top):
            return states
        if isinstance(g, Bottom):
            return frozenset()
        if isinstance(g, Or):
            return go(g.left, env) | go(g.right, env)
        if isinstance(g, And):
            return go(g.left, env) & go(g.right, env)
        if isinstance(g, Diamond):
            body = go(g.body, env)
            return frozenset(s for s in model.states
                             if any(t in body for t in succs[s]))
        if isinstance(g, Box):
            body = go(g.body, env)
            return frozenset(s for s in model.states
                             if all(t in body for t in succs[s]))
        if isinstance(g, Binder):
            current = frozenset() if isinstance(g, Mu) else states
            rounds = 0
            while True:
                rounds += 1
                new = go(g.body, {**env, g.var: current})
                if new == current:
                    break
                current = new
            if stats is not None:
                stats["max_rounds"] = max(stats.get("max_rounds", 0), rounds)
            return current
        raise TypeError(f"not a formula: {g!r}")

    return go(f, env)


# ---------------------------------------------------------------------------
# Evaluation game
# ---------------------------------------------------------------------------

@dataclass
class GameArena:
    """Positions are (subformula, state) pairs; two artificial sink
    positions absorb dead ends so that every position has a move."""

    positions: list
    owner: dict      # position -> EXISTS | FORALL
    moves: dict      # position -> tuple of positions
    priority: dict   # position -> int
    index: SubformulaIndex
    model: KripkeModel


_SINK_E = ("sink", "exists-wins")  # even priority: absorbing win for exists
_SINK_A = ("sink", "forall-wins")  # odd priority: absorbing win for forall


def build_arena(xi: Formula, model: KripkeModel) -> GameArena:
    """The evaluation game for clean xi on the model.

    Literal positions follow the stuck rule: the position is a dead end
    owned by the player who loses there. Binder and variable positions are
    deterministic and assigned to the exists player. The priority of a
    variable position (x_i, s) is 2i for nu-variables and 2i+1 for
    mu-variables, with x_1..x_n the fixed enumeration of bound variables.
    """
    idx = SubformulaIndex(xi)
    bound = set(idx.bound_vars)
    rank = {x: i + 1 for i, x in enumerate(idx.bound_vars)}
    binder_of = {}
    for g in idx.subs:
        if isinstance(g, Binder):
            binder_of[g.var] = g

    positions = []
    owner = {}
    moves = {}
    priority = {}

    def literal(pos, holds):
        # stuck player loses: make the loser own a dead end
        owner[pos] = FORALL if holds else EXISTS
        moves[pos] = ()

    for g in idx.subs:
        for s in model.states:
            pos = (g, s)
            positions.append(pos)
            priority[pos] = 0
            if isinstance(g, Atom) and g.name in bound:
                owner[pos] = EXISTS
                moves[pos] = ((idx.delta[g.name], s),)
                eta = idx.eta[g.name]
                priority[pos] = 2 * rank[g.name] + (1 if eta == "mu" else 0)
            elif isinstance(g, Atom):
                literal(pos, s in model.val(g.name))
            elif isinstance(g, NegAtom):
                literal(pos, s not in model.val(g.name))
            elif isinstance(g, Top):
                literal(pos, True)
            elif isinstance(g, Bottom):
                literal(pos, False)
            elif isinstance(g, Or):
                owner[pos] = EXISTS
                moves[pos] = ((g.left, s), (g.right, s))
            elif isinstance(g, And):
                owner[pos] = FORALL
                moves[pos] = ((g.left, s), (g.right, s))
            elif isinstance(g, Diamond):
                owner[pos] = EXISTS
                moves[pos] = tuple((g.body, t) for t in model.successors(s))
            elif isinstance(g, Box):
                owner[pos] = FORALL
                moves[pos] = tuple((g.body, t) for t in model.successors(s))
            elif isinstance(g, Binder):
                owner[pos] = EXISTS
                moves[pos] = ((g.body, s),)
            else:
                raise TypeError(f"not a formula: {g!r}")

    # absorb dead ends into sinks so the parity solver sees a total arena
    for sink, own, pr in ((_SINK_E, FORALL, 0), (_SINK_A, EXISTS, 1)):
        positions.append(sink)
        owner[sink] = own
        moves[sink] = (sink,)
        priority[sink] = pr
    for pos in positions[:-2]:
        if not moves[pos]:
            loser = owner[pos]
            moves[pos] = (_SINK_A,) if loser == EXISTS else (_SINK_E,)

    return GameArena(positions, owner, moves, priority, idx, model)


@dataclass
class WinningRegions:
    exists_region: set
    forall_region: set
    exists_strategy: dict = field(default_factory=dict)
    forall_strategy: dict = field(default_factory=dict)

    def exists_wins(self, pos) -> bool:
        return pos in self.exists_region


def _attractor(player, target, nodes, owner, moves, preds):
    """Least set containing target from which player can force entry.
    Returns the set and the player's strategy on its own nodes in it."""
    inside = set(target)
    strategy = {}
    out_degree = {v: sum(1 for w in moves[v] if w in nodes) for v in nodes}
    queue = list(target)
    while queue:
        v = queue.pop()
        for u in preds.get(v, ()):
            if u not in nodes or u in inside:
                continue
            if owner[u] == player:
                inside.add(u)
                strategy[u] = v
                queue.append(u)
            else:
                out_degree[u] -= 1
                if out_degree[u] == 0:
                    inside.add(u)
                    queue.append(u)
    return inside, strategy


def _zielonka(nodes, owner, moves, priority, preds):
    if not nodes:
        return set(), set(), {}, {}
    p = max(priority[v] for v in nodes)
    player = p % 2  # EXISTS on even top priority
    top = {v for v in nodes if priority[v] == p}
    attr, attr_strat = _attractor(player, top, nodes, owner, moves, preds)
    w0, w1, s0, s1 = _zielonka(nodes - attr, owner, moves, priority, preds)
    win_opp = w1 if player == EXISTS else w0
    if not win_opp:
        win = set(nodes)
        strat = dict(s0 if player == EXISTS else s1)
        strat.update(attr_strat)
        for v in top:
            if owner[v] == player and v not in strat:
                nxt = [w for w in moves[v] if w in nodes]
                strat[v] = nxt[0]
        if player == EXISTS:
            return win, set(), strat, {}
        return set(), win, {}, strat
    opp = 1 - player
    battr, battr_strat = _attractor(opp, win_opp, nodes, owner, moves, preds)
    opp_strat = dict(s1 if player == EXISTS else s0)
    opp_strat.update(battr_strat)
    w0b, w1b, s0b, s1b = _zielonka(nodes - battr, owner, moves, priority, preds)
    if player == EXISTS:
        return w0b, w1b | battr, s0b, {**opp_strat, **s1b}
    return w0b | battr, w1b, {**opp_strat, **s0b}, s1b


def solve_arena(arena: GameArena) -> WinningRegions:
    """Exact winning regions and positional strategies for both players."""
    preds = {}
    for v in arena.positions:
        for w in arena.moves[v]:
            preds.setdefault(w, []).append(v)
    nodes = set(arena.positions)
    w0, w1, s0, s1 = _zielonka(nodes, arena.owner, arena.moves,
                               arena.priority, preds)
    w0.discard(_SINK_E)
    w1.discard(_SINK_A)
    return WinningRegions(w0, w1, s0, s1)


# ---------------------------------------------------------------------------
# Cross-validation (game vs algebraic) and trace properties
# ---------------------------------------------------------------------------

@dataclass
class EquivReport:
    ok: bool
    positions_checked: int
    mismatches: list  # (printed subformula, state, game verdict, algebraic verdict)


def model_check_equiv(xi: Formula, model: KripkeModel) -> EquivReport:
    """At every position (phi, s): game membership in the exists region must
    coincide with s satisfying the expansion of phi."""
    from .textio import print_formula

    xi = canonicalize(xi)
    arena = build_arena(xi, model)
    regions = solve_arena(arena)
    idx = arena.index
    mismatches = []
    checked = 0
    for g in idx.subs:
        truth_set = eval_algebraic(idx.expansion(g), model)
        for s in model.states:
            checked += 1
            game = regions.exists_wins((g, s))
            alg = s in truth_set
            if game != alg:
                mismatches.append((print_formula(g), s, game, alg))
    return EquivReport(ok=not mismatches, positions_checked=checked,
                       mismatches=mismatches)


def model_check(f: Formula, model: KripkeModel, state=None, engine="algebraic"):
    """Truth of a sentence: the satisfying state set, or a bool at a state."""
    f = canonicalize(f)
    if engine == "algebraic":
        sat = eval_algebraic(f, model)
    elif engine == "game":
        regions = solve_arena(build_arena(f, model))
        sat = frozenset(s for s in model.states if regions.exists_wins((f, s)))
    else:
        raise ValueError(f"unknown engine {engine!r}")
    if state is None:
        return sat
    return state in sat


@dataclass
class TraceReport:
    ok: bool
    single_type_cycles: bool
    mu_to_nu_guarded: bool
    mu_to_box_guarded: bool
    witnesses: list  # (property name, path of printed formulas)


def _closure_graph(idx: SubformulaIndex):
    """State-free projection of the arena moves on subformula nodes."""
    edges = {}
    bound = set(idx.bound_vars)
    for g in idx.subs:
        if isinstance(g, Atom) and g.name in bound:
            edges[g] = (idx.delta[g.name],)
        elif isinstance(g, (Or, And)):
            edges[g] = (g.left, g.right)
        elif isinstance(g, (Diamond, Box)):
            edges[g] = (g.body,)
        elif isinstance(g, Binder):
            edges[g] = (g.body,)
        else:
            edges[g] = ()
    return edges


def _sccs(nodes, edges):
    """Tarjan's strongly connected components (formulas are small, so the
    recursive form is fine)."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    out = []
    counter = [0]

    def strongconnect(v):
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        for w in edges.get(v, ()):
            if w not in index:
                strongconnect(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(comp)

    for v in nodes:
        if v not in index:
            strongconnect(v)
    return out


def trace_property_check(xi: Formula) -> TraceReport:
    """The three trace properties on the formula's closure graph:
    (1) no cycle unfolds variables of both fixpoint types;
    (2) every path from a mu-binder to a nu-binder passes a free subformula;
    (3) likewise for paths from a mu-binder to a box node.
    A path "passes" a free subformula when some node after its source, up to
    and including the target, is a free subformula of xi.
    """
    from .textio import print_formula

    xi = canonicalize(xi)
    idx = SubformulaIndex(xi)
    edges = _closure_graph(idx)
    bound = set(idx.bound_vars)
    witnesses = []

    # (1) each strongly connected component is single-typed
    single = True
    for comp in _sccs(idx.subs, edges):
        etas = {idx.eta[g.name] for g in comp
                if isinstance(g, Atom) and g.name in bound}
        if len(etas) > 1:
            single = False
            witnesses.append(("single_type_cycles",
                              sorted(print_formula(g) for g in comp)))

    # (2)/(3): BFS from each mu-binder, never moving through free subformulas
    mu_to_nu = True
    mu_to_box = True
    for src in idx.subs:
        if not isinstance(src, Mu):
            continue
        parent = {src: None}
        queue = [src]
        while queue:
            v = queue.pop(0)
            for w in edges.get(v, ()):
                if w in parent:
                    continue
                if idx.is_free_subformula(w):
                    continue  # passing a free subformula discharges the path
                parent[w] = v
                queue.append(w)
                if isinstance(w, (Nu, Box)):
                    path = []
                    node = w
                    while node is not None:
                        path.append(print_formula(node))
                        node = parent[node]
                    path.reverse()
                    if isinstance(w, Nu):
                        mu_to_nu = False
                        witnesses.append(("mu_to_nu_guarded", path))
                    else:
                        mu_to_box = False
                        witnesses.append(("mu_to_box_guarded", path))
    return TraceReport(ok=single and mu_to_nu and mu_to_box,
                       single_type_cycles=single,
                       mu_to_nu_guarded=mu_to_nu,
                       mu_to_box_guarded=mu_to_box,
                       witnesses=witnesses)
