"""Seeded random formula generation.

Every generated formula lies in the continuous fragment by construction:
mu-binder bodies are drawn from the continuous grammar in the bound
variable, nu-binder bodies from the cocontinuous one. Parameters live in
data/gen_defaults.json so corpora are reproducible from a seed alone.
"""
from __future__ import annotations

import json
import random
from importlib import resources

from .syntax import (
    And, Atom, BOT, Box, Diamond, Formula, Mu, NegAtom, Nu, Or, TOP,
    canonicalize, is_continuous_mucalc,
)


def default_config() -> dict:
    text = resources.files("mucalc").joinpath("data/gen_defaults.json").read_text()
    return json.loads(text)


class FormulaGen:
    """Grammar-directed sampler for clean continuous-fragment formulas."""

    def __init__(self, rng: random.Random, config: dict | None = None):
        self.rng = rng
        cfg = config or default_config()
        self.max_depth = cfg["max_depth"]
        self.atoms = list(cfg["atoms"])
        self.max_bound_vars = cfg["max_bound_vars"]
        self._binders_used = 0

    def formula(self) -> Formula:
        """One clean formula in the continuous fragment."""
        self._binders_used = 0
        out = canonicalize(self._any(self.max_depth))
        assert is_continuous_mucalc(out)
        return out

    def _literal(self, xs):
        choices = []
        if xs:
            choices += [Atom(x) for x in xs] * 2
        choices += [Atom(a) for a in self.atoms]
        choices += [NegAtom(a) for a in self.atoms]
        choices += [TOP, BOT]
        return self.rng.choice(choices)

    def _can_bind(self):
        return self._binders_used < self.max_bound_vars

    def _new_var(self):
        self._binders_used += 1
        return f"v{self._binders_used}"

    def _any(self, depth):
        """Unconstrained continuous-fragment formula."""
        if depth == 0:
            return self._literal(frozenset())
        ops = ["lit", "or", "and", "dia", "box"]
        if self._can_bind():
            ops += ["mu", "nu"]
        op = self.rng.choice(ops)
        if op == "lit":
            return self._literal(frozenset())
        if op == "or":
            return Or(self._any(depth - 1), self._any(depth - 1))
        if op == "and":
            return And(self._any(depth - 1), self._any(depth - 1))
        if op == "dia":
            return Diamond(self._any(depth - 1))
        if op == "box":
            return Box(self._any(depth - 1))
        var = self._new_var()
        if op == "mu":
            return Mu(var, self._con(depth - 1, frozenset({var})))
        return Nu(var, self._cocon(depth - 1, frozenset({var})))

    def _con(self, depth, xs):
        """Formula in the continuous grammar for the variables xs."""
        if depth == 0:
            return self._literal(xs)
        ops = ["lit", "or", "and", "dia", "free"]
        if self._can_bind():
            ops.append("mu")
        op = self.rng.choice(ops)
        if op == "lit":
            return self._literal(xs)
        if op == "or":
            return Or(self._con(depth - 1, xs), self._con(depth - 1, xs))
        if op == "and":
            return And(self._con(depth - 1, xs), self._con(depth - 1, xs))
        if op == "dia":
            return Diamond(self._con(depth - 1, xs))
        if op == "free":
            # an xs-free formula is allowed anywhere in the grammar
            return self._xs_free(depth - 1, xs)
        var = self._new_var()
        return Mu(var, self._con(depth - 1, xs | {var}))

    def _cocon(self, depth, xs):
        """Formula in the cocontinuous grammar for the variables xs."""
        if depth == 0:
            return self._literal(xs)
        ops = ["lit", "or", "and", "box", "free"]
        if self._can_bind():
            ops.append("nu")
        op = self.rng.choice(ops)
        if op == "lit":
            return self._literal(xs)
        if op == "or":
            return Or(self._cocon(depth - 1, xs), self._cocon(depth - 1, xs))
        if op == "and":
            return And(self._cocon(depth - 1, xs), self._cocon(depth - 1, xs))
        if op == "box":
            return Box(self._cocon(depth - 1, xs))
        if op == "free":
            return self._xs_free(depth - 1, xs)
        var = self._new_var()
        return Nu(var, self._cocon(depth - 1, xs | {var}))

    def _xs_free(self, depth, xs):
        """Unconstrained formula guaranteed not to mention xs freely.

        The unconstrained grammar only introduces xs through _literal(xs),
        which _any never calls with a non-empty set, so _any suffices.
        """
        return self._any(depth)


def random_formula(seed: int, config: dict | None = None) -> Formula:
    return FormulaGen(random.Random(seed), config).formula()


def random_corpus(seed: int, count: int, config: dict | None = None) -> list:
    gen = FormulaGen(random.Random(seed), config)
    return [gen.formula() for _ in range(count)]
