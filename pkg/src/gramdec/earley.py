"""Character-incremental Earley recognition over reduced grammars.

A PrefixState tracks the chart after consuming a character prefix. States
are values: advancing returns a fresh state and never mutates the source,
so beam-search branches can fork freely. For reduced grammars, a prefix is
accepted exactly when it extends to some member of the language.
"""

from __future__ import annotations

from .engine import kernel
from .errors import GrammarValidationError
from .grammar import CHARCLASS, NONTERMINAL, TERMINAL, Grammar, reduce

_NT = 0
_T = 1
_CC = 2


class CompiledGrammar:
    """Integer-coded production tables consumed by the chart kernel."""

    def __init__(self, grammar: Grammar):
        from .grammar import nullable_set

        self.grammar = grammar
        names = grammar.nonterminals
        self.nt_ids = {name: i for i, name in enumerate(names)}
        prods_lhs = []
        prods_rhs = []
        by_lhs = [[] for _ in names]
        for p in grammar.productions:
            rhs = []
            for sym in p.rhs:
                if sym.kind == NONTERMINAL:
                    rhs.append((_NT, self.nt_ids[sym.name]))
                elif sym.kind == TERMINAL:
                    if sym.text:
                        rhs.append((_T, sym.text))
                    # "" is epsilon: encoded as an empty rhs
                elif sym.kind == CHARCLASS:
                    rhs.append((_CC, sym.negated, sym.chars))
            idx = len(prods_lhs)
            prods_lhs.append(self.nt_ids[p.lhs])
            prods_rhs.append(rhs)
            by_lhs[self.nt_ids[p.lhs]].append(idx)
        nullable_names = nullable_set(grammar)
        nullable = [name in nullable_names for name in names]
        self.tables = (prods_lhs, prods_rhs, by_lhs, nullable, self.nt_ids[grammar.start])


def _ensure_reduced(g: Grammar) -> None:
    # Viable-prefix = extensibility only holds for reduced grammars, so an
    # unreduced grammar here is a caller bug, not a degraded mode.
    reduced = reduce(g)
    if len(reduced.productions) != len(g.productions):
        raise GrammarValidationError(
            "grammar must be reduced before recognition (call grammar.reduce)"
        )


class CharMask:
    """Set of legal next characters; may be cofinite via negated classes."""

    def __init__(self, positive, negated_classes=()):
        self.positive = frozenset(positive)
        self.negated_classes = tuple(frozenset(n) for n in negated_classes)

    def __contains__(self, c) -> bool:
        if c in self.positive:
            return True
        return any(c not in neg for neg in self.negated_classes)

    @property
    def is_finite(self) -> bool:
        return not self.negated_classes

    def as_set(self) -> frozenset:
        if not self.is_finite:
            raise ValueError("character mask is cofinite, not enumerable")
        return self.positive

    def __iter__(self):
        return iter(sorted(self.as_set()))

    def __eq__(self, other):
        if isinstance(other, CharMask):
            if self.is_finite and other.is_finite:
                return self.positive == other.positive
            return (
                self.positive == other.positive
                and self.negated_classes == other.negated_classes
            )
        if isinstance(other, (set, frozenset)):
            return self.is_finite and self.positive == frozenset(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.positive, frozenset(self.negated_classes)))

    def __repr__(self):
        if self.is_finite:
            return f"CharMask({sorted(self.positive)!r})"
        return (
            f"CharMask({sorted(self.positive)!r}, "
            f"negated={[sorted(n) for n in self.negated_classes]!r})"
        )


class PrefixState:
    """Earley chart state after consuming a character prefix."""

    __slots__ = ("compiled", "_columns", "consumed")

    def __init__(self, compiled: CompiledGrammar, columns, consumed: int):
        self.compiled = compiled
        self._columns = columns
        self.consumed = consumed

    @property
    def grammar(self) -> Grammar:
        return self.compiled.grammar

    def advance_char(self, c: str) -> "PrefixState | None":
        """New state after one character, or None if the prefix dies."""
        if len(c) != 1:
            raise ValueError("advance_char takes exactly one character")
        columns = kernel.advance(self.compiled.tables, self._columns, c)
        if columns is None:
            return None
        return PrefixState(self.compiled, columns, self.consumed + 1)

    def advance_string(self, s: str) -> "tuple[PrefixState | None, int]":
        """Advance over each character; returns (state or None, chars consumed)."""
        state = self
        for i, c in enumerate(s):
            nxt = state.advance_char(c)
            if nxt is None:
                return None, i
            state = nxt
        return state, len(s)

    def allowed_next_chars(self) -> CharMask:
        positive, negated = kernel.next_chars(self.compiled.tables, self._columns)
        return CharMask(positive, negated)

    def is_complete(self) -> bool:
        return kernel.accepted(self.compiled.tables, self._columns)


def init_state(g: Grammar | CompiledGrammar) -> PrefixState:
    """Fresh state for the empty prefix; the grammar must be reduced."""
    if isinstance(g, CompiledGrammar):
        compiled = g
    else:
        _ensure_reduced(g)
        compiled = CompiledGrammar(g)
    return PrefixState(compiled, kernel.initial_chart(compiled.tables), 0)


def advance_char(s: PrefixState, c: str) -> PrefixState | None:
    return s.advance_char(c)


def allowed_next_chars(s: PrefixState) -> CharMask:
    return s.allowed_next_chars()


def is_complete(s: PrefixState) -> bool:
    return s.is_complete()


def check_string(g: Grammar, text: str):
    """Recognize a whole string: (verdict, offset).

    verdict is "accepted" (member), "incomplete" (viable prefix but not a
    member), or "rejected" with offset at the first dead character.
    """
    state = init_state(g)
    nxt, consumed = state.advance_string(text)
    if nxt is None:
        return "rejected", consumed
    if nxt.is_complete():
        return "accepted", len(text)
    return "incomplete", len(text)
