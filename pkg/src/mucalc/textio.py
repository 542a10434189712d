"""Concrete syntax: formula parser and pretty-printer, Kripke model JSON.

Surface syntax is ASCII: atoms match [a-z][a-zA-Z0-9_]*, connectives are
`!`, `&`, `|`, `<>`, `[]`, `->`, `<->`, binders are `mu x. ...` and
`nu x. ...` (extending maximally right), constants `true`/`false`.
Unicode aliases are accepted on input only. `!`, `->` and `<->` are sugar:
the parser pushes them into negation normal form.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .errors import InputError
from .syntax import (
    And, Atom, BOT, Bottom, Box, Diamond, Formula, Mu, NegAtom, Nu, Or, TOP,
    Top, iff, implies, negate,
)


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int


class ParseError(InputError):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{message} (at bytes {span.start}..{span.end})")
        self.span = span


_ALIASES = {"◇": "<>", "□": "[]", "μ": "mu ", "ν": "nu ", "¬": "!",
            "∨": "|", "∧": "&", "⊤": "true", "⊥": "false", "→": "->", "↔": "<->"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<iff><->)
  | (?P<imp>->)
  | (?P<dia><>)
  | (?P<box>\[\])
  | (?P<name>[a-z][a-zA-Z0-9_]*)
  | (?P<punct>[!&|().])
""", re.VERBOSE)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             SourceSpan(pos, pos + 1))
        if m.lastgroup != "ws":
            kind = m.lastgroup
            val = m.group()
            if kind == "name" and val in ("mu", "nu", "true", "false"):
                kind = val
            elif kind == "punct":
                kind = val
            tokens.append((kind, val, SourceSpan(m.start(), m.end())))
        pos = m.end()
    tokens.append(("eof", "", SourceSpan(len(text), len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    # expr := iff ;  iff/imp are sugar, desugared immediately
    def expr(self):
        left = self.imp()
        if self.peek()[0] == "iff":
            self.take()
            right = self.expr()
            return iff(left, right)
        return left

    def imp(self):
        left = self.disj()
        if self.peek()[0] == "imp":
            self.take()
            right = self.imp()
            return implies(left, right)
        return left

    def disj(self):
        left = self.conj()
        while self.peek()[0] == "|":
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.peek()[0] == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self):
        kind, _, span = self.peek()
        if kind == "!":
            self.take()
            return negate(self.unary())
        if kind == "dia":
            self.take()
            return Diamond(self.unary())
        if kind == "box":
            self.take()
            return Box(self.unary())
        if kind in ("mu", "nu"):
            self.take()
            var = self.take("name")[1]
            self.take(".")
            body = self.expr()  # binder extends maximally right
            return Mu(var, body) if kind == "mu" else Nu(var, body)
        return self.primary()

    def primary(self):
        kind, val, span = self.take()
        if kind == "name":
            return Atom(val)
        if kind == "true":
            return TOP
        if kind == "false":
            return BOT
        if kind == "(":
            inner = self.expr()
            self.take(")")
            return inner
        raise ParseError(f"unexpected token {val!r}", span)


def parse_formula(text: str) -> Formula:
    """Parse one formula. Raises ParseError with a SourceSpan on bad input."""
    for alias, ascii_form in _ALIASES.items():
        text = text.replace(alias, ascii_form)
    p = _Parser(text)
    out = p.expr()
    if p.peek()[0] != "eof":
        kind, val, span = p.peek()
        raise ParseError(f"trailing input {val!r}", span)
    return out


def parse_formula_lines(text: str):
    """Parse a .mcf document: one formula per non-empty, non-comment line."""
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(parse_formula(line))
    return out


# precedence levels for printing: binder 0, | 1, & 2, unary 3, literal 4
def _prec(f: Formula) -> int:
    if isinstance(f, (Mu, Nu)):
        return 0
    if isinstance(f, Or):
        return 1
    if isinstance(f, And):
        return 2
    if isinstance(f, (Diamond, Box)):
        return 3
    return 4


def print_formula(f: Formula) -> str:
    """Deterministic printing with minimal parenthesization; round-trips
    through parse_formula."""

    def go(g, ctx: int) -> str:
        p = _prec(g)
        if isinstance(g, Atom):
            s = g.name
        elif isinstance(g, NegAtom):
            s = f"!{g.name}"
        elif isinstance(g, Top):
            s = "true"
        elif isinstance(g, Bottom):
            s = "false"
        elif isinstance(g, Or):
            s = f"{go(g.left, 1)} | {go(g.right, 2)}"
        elif isinstance(g, And):
            s = f"{go(g.left, 2)} & {go(g.right, 3)}"
        elif isinstance(g, Diamond):
            s = f"<>{go(g.body, 3)}"
        elif isinstance(g, Box):
            s = f"[]{go(g.body, 3)}"
        elif isinstance(g, Mu):
            s = f"mu {g.var}. {go(g.body, 0)}"
        elif isinstance(g, Nu):
            s = f"nu {g.var}. {go(g.body, 0)}"
        else:
            raise TypeError(f"not a formula: {g!r}")
        return f"({s})" if p < ctx else s

    return go(f, 0)


# ---------------------------------------------------------------------------
# Kripke model JSON (.kmj)
# ---------------------------------------------------------------------------

def read_model(text: str):
    """Parse a .kmj document into a KripkeModel."""
    from .kripke import KripkeModel

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"bad model JSON: {e}") from None
    if not isinstance(doc, dict):
        raise InputError("model document must be a JSON object")
    states = doc.get("states")
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise InputError('"states" must be an array of strings')
    if len(set(states)) != len(states):
        dup = next(s for s in states if states.count(s) > 1)
        raise InputError(f"duplicate state name {dup!r}")
    if not states:
        raise InputError("state set must be non-empty")
    declared = set(states)
    edges = []
    for e in doc.get("edges", []):
        if (not isinstance(e, list)) or len(e) != 2:
            raise InputError(f"bad edge {e!r}")
        for endpoint in e:
            if endpoint not in declared:
                raise InputError(f"undeclared state {endpoint!r} in edge {e!r}")
        edges.append((e[0], e[1]))
    valuation = {}
    val_doc = doc.get("valuation", {})
    if not isinstance(val_doc, dict):
        raise InputError('"valuation" must be an object')
    for atom, ss in val_doc.items():
        if not isinstance(ss, list):
            raise InputError(f"valuation of {atom!r} must be an array")
        for s in ss:
            if s not in declared:
                raise InputError(f"undeclared state {s!r} in valuation of {atom!r}")
        valuation[atom] = frozenset(ss)
    return KripkeModel.make(states, edges, valuation)


def write_model(model) -> str:
    """Canonical .kmj document for a model (sorted, deterministic)."""
    doc = {
        "states": list(model.states),
        "edges": [[a, b] for (a, b) in sorted(model.relation)],
        "valuation": {atom: sorted(model.val(atom)) for atom in sorted(model.atoms)},
    }
    return json.dumps(doc, indent=1, sort_keys=True)
