"""Grammar induction from training programs.

Two procedures share one idea: a nonterminal per type, a production per
observed operator application. For s-expression programs the types come
from a declared signature table; for bracketed intent/slot trees a simple
type system is induced from the labels themselves (intents, slots, and an
open-class TEXT nonterminal for raw token spans).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .earley import init_state
from .errors import InductionError, MtopParseError, TypeCheckError
from .grammar import Grammar, Production, Symbol, parse_grammar, reduce


@dataclass
class SignatureTable:
    """Operator signatures plus charclass-based literal grammars per type."""

    signatures: dict = field(default_factory=dict)  # symbol -> (args, result)
    literals: dict = field(default_factory=dict)  # type -> grammar snippet text

    def add_signature(self, symbol, args, result):
        if symbol in self.signatures:
            raise InductionError(f"duplicate signature for {symbol!r}")
        self.signatures[symbol] = (tuple(args), result)

    def add_literal(self, type_name, snippet):
        if type_name in self.literals:
            raise InductionError(f"duplicate literal class for {type_name!r}")
        # The snippet's first rule must define the type's own nonterminal.
        g = parse_grammar(snippet)
        if g.start != type_name:
            raise InductionError(
                f"literal snippet for {type_name!r} starts at {g.start!r}"
            )
        self.literals[type_name] = snippet

    def literal_grammar(self, type_name) -> Grammar:
        return reduce(parse_grammar(self.literals[type_name]))


def load_signatures(text: str) -> SignatureTable:
    """Parse the JSONL sidecar: {"symbol","args","result"} and
    {"literal","class"} records."""
    table = SignatureTable()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InductionError(f"bad JSON on line {lineno}: {exc}") from None
        if "symbol" in rec:
            table.add_signature(rec["symbol"], rec["args"], rec["result"])
        elif "literal" in rec:
            table.add_literal(rec["literal"], rec["class"])
        else:
            raise InductionError(f"unrecognized record on line {lineno}")
    return table


@dataclass
class TypedExpression:
    node: object  # SexpNode
    type: str
    children: list


def _check_literal(atom: str, type_name: str, sigs: SignatureTable, cache: dict):
    if type_name not in sigs.literals:
        raise TypeCheckError(
            f"atom {atom!r} where non-literal type {type_name!r} expected"
        )
    g = cache.get(type_name)
    if g is None:
        g = sigs.literal_grammar(type_name)
        cache[type_name] = g
    state, _ = init_state(g).advance_string(atom)
    if state is None or not state.is_complete():
        raise TypeCheckError(f"ill-typed literal {atom!r} for type {type_name!r}")


def type_check(program, sigs: SignatureTable, expected=None, _cache=None):
    """Annotate every node of an s-expression program with its type."""
    if _cache is None:
        _cache = {}
    if isinstance(program, str):
        if expected is None:
            raise TypeCheckError(f"bare literal {program!r} at program root")
        _check_literal(program, expected, sigs, _cache)
        return TypedExpression(program, expected, [])
    if not program or not isinstance(program[0], str):
        raise TypeCheckError("application must start with an operator symbol")
    symbol = program[0]
    if symbol not in sigs.signatures:
        raise TypeCheckError(f"unknown symbol {symbol!r}")
    args, result = sigs.signatures[symbol]
    actual = program[1:]
    if len(actual) != len(args):
        raise TypeCheckError(
            f"{symbol!r} expects {len(args)} arguments, got {len(actual)}"
        )
    if expected is not None and result != expected:
        raise TypeCheckError(
            f"{symbol!r} yields {result!r} where {expected!r} expected"
        )
    children = [
        type_check(child, sigs, expected=arg_type, _cache=_cache)
        for child, arg_type in zip(actual, args)
    ]
    return TypedExpression(program, result, children)


_NT_SAFE = re.compile(r"[^A-Za-z0-9_]")


def _type_nt(type_name: str, taken: dict) -> str:
    """Stable identifier-safe nonterminal name for a type."""
    if type_name in taken:
        return taken[type_name]
    base = _NT_SAFE.sub("_", type_name)
    if not base or base[0].isdigit():
        base = "T_" + base
    name = base
    k = 2
    while name in taken.values():
        name = f"{base}_{k}"
        k += 1
    taken[type_name] = name
    return name


def induce_lispress_grammar(
    programs, sigs: SignatureTable, root_type: str | None = None
) -> Grammar:
    """Type-driven CFG over typed programs: a nonterminal per observed type,
    a production per observed (operator, argument types, result type).

    Literal-typed leaves expand through the type's declared literal grammar
    snippet, so unseen literal values stay generable.
    """
    if not programs:
        raise InductionError("no programs to induce from")
    nt_names: dict = {}
    productions = []
    seen = set()
    literal_types = []

    def add(prod):
        key = (prod.lhs, prod.rhs)
        if key not in seen:
            seen.add(key)
            productions.append(prod)

    def visit(tx: TypedExpression):
        if isinstance(tx.node, str):
            if tx.type not in literal_types:
                literal_types.append(tx.type)
            return
        symbol = tx.node[0]
        lhs = _type_nt(tx.type, nt_names)
        rhs = []
        if not tx.children:
            rhs.append(Symbol.t(f"({symbol})"))
        else:
            rhs.append(Symbol.t(f"({symbol} "))
            for i, child in enumerate(tx.children):
                if i:
                    rhs.append(Symbol.t(" "))
                rhs.append(Symbol.nt(_type_nt(child.type, nt_names)))
            rhs.append(Symbol.t(")"))
        add(Production(lhs, tuple(rhs)))
        for child in tx.children:
            visit(child)

    roots = []
    for tx in programs:
        if tx.type not in roots:
            roots.append(tx.type)
        visit(tx)
    if root_type is None:
        if len(roots) != 1:
            raise InductionError(
                f"programs have conflicting root types {roots}; pass root_type"
            )
        root_type = roots[0]

    # Splice in literal grammars; their first rule's lhs is the type name
    # itself, which we alias to the type's nonterminal.
    for type_name in literal_types:
        if type_name not in sigs.literals:
            raise InductionError(f"no literal class declared for {type_name!r}")
        snippet = parse_grammar(sigs.literals[type_name])
        lhs_alias = {type_name: _type_nt(type_name, nt_names)}
        for p in snippet.productions:
            lhs = lhs_alias.get(p.lhs, p.lhs)
            rhs = tuple(
                Symbol.nt(lhs_alias.get(s.name, s.name))
                if s.kind == "nonterminal"
                else s
                for s in p.rhs
            )
            add(Production(lhs, rhs))

    start = _type_nt(root_type, nt_names)
    if not any(p.lhs == start for p in productions):
        raise InductionError(f"root type {root_type!r} never produced")
    return reduce(Grammar(start, productions))


# ---------------------------------------------------------------------------
# MTOP-style bracketed intent/slot trees


@dataclass
class MtopTree:
    label: str
    children: list  # MtopTree or raw token-span str

    def render(self) -> str:
        parts = [f"[{self.label}"]
        for child in self.children:
            if isinstance(child, MtopTree):
                parts.append(" " + child.render())
            else:
                parts.append(" " + child)
        return "".join(parts) + "]"


def parse_mtop(text: str) -> MtopTree:
    """Parse a bracketed representation like
    [IN:Get_Message [SL:Type_Content video] [SL:Sender Atlas]]."""

    pos = 0
    n = len(text)

    def parse_node():
        nonlocal pos
        assert text[pos] == "["
        pos += 1
        m = re.match(r"(IN|SL):[A-Za-z0-9_]+", text[pos:])
        if not m:
            raise MtopParseError(
                f"label without IN:/SL: prefix at offset {pos}"
            )
        label = m.group(0)
        pos += len(label)
        children = []
        span = []

        def flush():
            s = "".join(span).strip()
            if s:
                children.append(s)
            span.clear()

        while True:
            if pos >= n:
                raise MtopParseError("unbalanced brackets: missing ']'")
            c = text[pos]
            if c == "]":
                flush()
                pos += 1
                return MtopTree(label, children)
            if c == "[":
                flush()
                children.append(parse_node())
            else:
                span.append(c)
                pos += 1

    stripped = text.strip()
    if not stripped.startswith("["):
        raise MtopParseError("input does not start with '['")
    offset = text.index("[")
    pos = offset
    tree = parse_node()
    if text[pos:].strip():
        raise MtopParseError("trailing garbage after tree")
    if not tree.label.startswith("IN:"):
        raise MtopParseError(f"root label {tree.label!r} is not an intent")
    _validate_mtop(tree)
    return tree


def _validate_mtop(tree: MtopTree):
    for child in tree.children:
        if isinstance(child, MtopTree):
            if tree.label.startswith("SL:") and child.label.startswith("IN:"):
                raise MtopParseError(
                    f"slot {tree.label} contains intent {child.label}"
                )
            _validate_mtop(child)


_MTOP_START = "MTOP_START"
_MTOP_TEXT = "TEXT"


def induce_mtop_grammar(trees) -> Grammar:
    """CFG over intent/slot trees: INTENT_x / SLOT_y nonterminals, one
    production per observed (parent label, child pattern), and an open-class
    TEXT nonterminal for raw token spans."""
    if not trees:
        raise InductionError("no trees to induce from")

    productions = []
    seen = set()
    roots = []
    uses_text = False

    def add(lhs, rhs):
        key = (lhs, tuple(rhs))
        if key not in seen:
            seen.add(key)
            productions.append(Production(lhs, tuple(rhs)))

    def label_nt(label: str) -> str:
        prefix = "INTENT_" if label.startswith("IN:") else "SLOT_"
        return prefix + label.split(":", 1)[1]

    def visit(node: MtopTree):
        nonlocal uses_text
        lhs = label_nt(node.label)
        rhs = [Symbol.t(f"[{node.label}")]
        for child in node.children:
            rhs.append(Symbol.t(" "))
            if isinstance(child, MtopTree):
                rhs.append(Symbol.nt(label_nt(child.label)))
            else:
                rhs.append(Symbol.nt(_MTOP_TEXT))
                uses_text = True
        rhs.append(Symbol.t("]"))
        add(lhs, rhs)
        for child in node.children:
            if isinstance(child, MtopTree):
                visit(child)

    start_alts = []
    for tree in trees:
        nt = label_nt(tree.label)
        if nt not in start_alts:
            start_alts.append(nt)
        visit(tree)

    prods = [Production(_MTOP_START, (Symbol.nt(nt),)) for nt in start_alts]
    prods.extend(productions)
    if uses_text:
        prods.append(
            Production(
                _MTOP_TEXT,
                (Symbol.cc("[]", negated=True),),
            )
        )
        prods.append(
            Production(
                _MTOP_TEXT,
                (Symbol.cc("[]", negated=True), Symbol.nt(_MTOP_TEXT)),
            )
        )
    return reduce(Grammar(_MTOP_START, prods))
