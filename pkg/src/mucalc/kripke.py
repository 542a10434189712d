"""Finite Kripke models, frame classes, and model generators."""
from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass

from .errors import BudgetExceededError, InputError


@dataclass(frozen=True)
class KripkeModel:
    """A finite Kripke model (S, R, V). Immutable; states are strings."""

    states: tuple
    relation: frozenset  # of (from, to) pairs
    valuation: tuple     # sorted ((atom, frozenset-of-states), ...)

    @classmethod
    def make(cls, states, relation, valuation):
        states = tuple(sorted(states))
        if not states:
            raise InputError("state set must be non-empty")
        sset = set(states)
        relation = frozenset((a, b) for (a, b) in relation)
        for (a, b) in relation:
            if a not in sset or b not in sset:
                raise InputError(f"relation mentions undeclared state in {(a, b)!r}")
        val = []
        for atom, members in dict(valuation).items():
            members = frozenset(members)
            if not members <= sset:
                bad = sorted(members - sset)[0]
                raise InputError(f"valuation of {atom!r} mentions undeclared state {bad!r}")
            val.append((atom, members))
        return cls(states, relation, tuple(sorted(val)))

    @property
    def atoms(self):
        return tuple(a for (a, _) in self.valuation)

    def val(self, atom) -> frozenset:
        for (a, members) in self.valuation:
            if a == atom:
                return members
        return frozenset()

    def successors(self, s) -> tuple:
        return tuple(sorted(t for (a, t) in self.relation if a == s))

    def update_valuation(self, atom, members) -> "KripkeModel":
        members = frozenset(members)
        if not members <= set(self.states):
            raise InputError(f"valuation update for {atom!r} leaves the state set")
        val = dict(self.valuation)
        val[atom] = members
        return KripkeModel(self.states, self.relation, tuple(sorted(val.items())))


def update_valuation(model: KripkeModel, atom, members) -> KripkeModel:
    return model.update_valuation(atom, members)


class FrameClass(enum.Enum):
    K = "K"
    T = "T"
    KB = "KB"
    K4 = "K4"
    S4 = "S4"
    S5 = "S5"


# the relation properties each class requires
_REQUIRES = {
    FrameClass.K: (),
    FrameClass.T: ("reflexive",),
    FrameClass.KB: ("symmetric",),
    FrameClass.K4: ("transitive",),
    FrameClass.S4: ("reflexive", "transitive"),
    FrameClass.S5: ("reflexive", "symmetric", "transitive"),
}


def _reflexive_witness(model):
    for s in model.states:
        if (s, s) not in model.relation:
            return (s,)
    return None


def _symmetric_witness(model):
    for (a, b) in sorted(model.relation):
        if (b, a) not in model.relation:
            return (a, b)
    return None


def _transitive_witness(model):
    for (a, b) in sorted(model.relation):
        for (b2, c) in sorted(model.relation):
            if b == b2 and (a, c) not in model.relation:
                return (a, b, c)
    return None


_WITNESS = {
    "reflexive": _reflexive_witness,
    "symmetric": _symmetric_witness,
    "transitive": _transitive_witness,
}


def frame_class_check(model: KripkeModel, cls: FrameClass):
    """(True, None) if the model's frame lies in the class, else
    (False, (property name, violating state tuple))."""
    for prop in _REQUIRES[cls]:
        witness = _WITNESS[prop](model)
        if witness is not None:
            return False, (prop, witness)
    return True, None


def reflexive_closure(relation, states):
    return frozenset(relation) | {(s, s) for s in states}


def symmetric_closure(relation, states=None):
    return frozenset(relation) | {(b, a) for (a, b) in relation}


def transitive_closure(relation, states=None):
    rel = set(relation)
    changed = True
    while changed:
        changed = False
        for (a, b) in list(rel):
            for (b2, c) in list(rel):
                if b == b2 and (a, c) not in rel:
                    rel.add((a, c))
                    changed = True
    return frozenset(rel)


def equivalence_closure(relation, states):
    return transitive_closure(symmetric_closure(reflexive_closure(relation, states)))


def _state_names(n):
    return tuple(f"s{i}" for i in range(n))


def _space_size(n, num_atoms):
    return 2 ** (n * n) * 2 ** (n * num_atoms)


DEFAULT_ENUM_BUDGET = 5_000_000


def enumerate_models_exact(n, atoms, cls: FrameClass = FrameClass.K):
    """All models with exactly n states over the given atoms whose frame
    lies in the class, in deterministic order: relation bitmap, then
    valuation bitmap."""
    atoms = tuple(atoms)
    states = _state_names(n)
    pairs = [(a, b) for a in states for b in states]
    cells = [(atom, s) for atom in atoms for s in states]
    for rel_bits in range(2 ** len(pairs)):
        relation = frozenset(
            pairs[i] for i in range(len(pairs)) if rel_bits >> i & 1)
        candidate_frame = KripkeModel(states, relation, ())
        ok, _ = frame_class_check(candidate_frame, cls)
        if not ok:
            continue
        for val_bits in range(2 ** len(cells)):
            val = {atom: frozenset() for atom in atoms}
            for i in range(len(cells)):
                if val_bits >> i & 1:
                    atom, s = cells[i]
                    val[atom] = val[atom] | {s}
            yield KripkeModel(states, relation, tuple(sorted(val.items())))


def enumerate_models(max_states, atoms, cls: FrameClass = FrameClass.K,
                     budget: int = DEFAULT_ENUM_BUDGET):
    """All models with 1..max_states states over the given atoms whose frame
    lies in the class. Exhaustive, duplicate-free, deterministic order:
    state count, then relation bitmap, then valuation bitmap.

    Refuses up front if the raw candidate space exceeds the budget.
    """
    atoms = tuple(atoms)
    total = sum(_space_size(n, len(atoms)) for n in range(1, max_states + 1))
    if total > budget:
        raise BudgetExceededError(
            f"enumeration space has {total} candidates, budget is {budget}")
    for n in range(1, max_states + 1):
        yield from enumerate_models_exact(n, atoms, cls)


def count_models(max_states, atoms, cls: FrameClass = FrameClass.K,
                 budget: int = DEFAULT_ENUM_BUDGET) -> int:
    return sum(1 for _ in enumerate_models(max_states, atoms, cls, budget))


def random_model(rng: random.Random, max_states: int, atoms,
                 cls: FrameClass = FrameClass.K) -> KripkeModel:
    """A random model whose frame lies in the class.

    For K the sample is uniform over the enumeration space (state counts
    weighted by their share of it). For T/KB it is uniform over the class:
    the free relation bits are exactly the non-forced ones. For K4/S4/S5
    a random relation is pushed into the class by the appropriate closure,
    which is not a uniform distribution over the class.
    """
    atoms = tuple(atoms)
    weights = [_space_size(n, len(atoms)) for n in range(1, max_states + 1)]
    n = rng.choices(range(1, max_states + 1), weights=weights)[0]
    states = _state_names(n)
    relation = frozenset((a, b) for a in states for b in states
                         if rng.random() < 0.5)
    if cls is FrameClass.T:
        relation = reflexive_closure(relation, states)
    elif cls is FrameClass.KB:
        relation = frozenset((a, b) for (a, b) in itertools.product(states, states)
                             if a <= b and rng.random() < 0.5)
        relation = symmetric_closure(relation)
    elif cls is FrameClass.K4:
        relation = transitive_closure(relation)
    elif cls is FrameClass.S4:
        relation = transitive_closure(reflexive_closure(relation, states))
    elif cls is FrameClass.S5:
        relation = equivalence_closure(relation, states)
    val = {atom: frozenset(s for s in states if rng.random() < 0.5)
           for atom in atoms}
    return KripkeModel(states, relation, tuple(sorted(val.items())))
