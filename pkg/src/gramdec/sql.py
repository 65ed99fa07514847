"""Per-example schema specialization of the shipped SQL-subset grammar.

Specialization is vocabulary-only: the TABLE_NAME and COLUMN_NAME
placeholder nonterminals are rewritten to one terminal per schema
identifier (plus qualified table.column forms), so only schema-consistent
names are generable. There is no guard tying a column to the FROM clause.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import EmptyLanguageError, SchemaError
from .grammar import Grammar, Production, Symbol, parse_grammar, reduce

TABLE_NT = "TABLE_NAME"
COLUMN_NT = "COLUMN_NAME"


@dataclass
class DbColumn:
    name: str
    type: str = "text"
    values: list = field(default_factory=list)


@dataclass
class DbTable:
    name: str
    columns: list


@dataclass
class DbSchema:
    tables: list

    def __post_init__(self):
        names = [t.name for t in self.tables]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate table names")
        for t in self.tables:
            if not t.name:
                raise SchemaError("empty table name")
            cols = [c.name for c in t.columns]
            if len(set(cols)) != len(cols):
                raise SchemaError(f"duplicate column names in table {t.name!r}")
            if any(not c for c in cols):
                raise SchemaError(f"empty column name in table {t.name!r}")


def load_schema_json(text: str) -> DbSchema:
    """Schema wire format:
    {"tables":[{"name":..., "columns":[{"name":...,"type":...,"values":[...]}]}]}
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"bad schema JSON: {exc}") from None
    try:
        tables = [
            DbTable(
                name=t["name"],
                columns=[
                    DbColumn(
                        name=c["name"],
                        type=c.get("type", "text"),
                        values=list(c.get("values", [])),
                    )
                    for c in t["columns"]
                ],
            )
            for t in data["tables"]
        ]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed schema record: {exc}") from None
    return DbSchema(tables)


def load_base_sql_grammar() -> Grammar:
    """The shipped SQL-subset grammar with placeholder name nonterminals."""
    text = (
        resources.files("gramdec").joinpath("data/sql_subset.cfg").read_text("utf-8")
    )
    return parse_grammar(text)


def specialize_sql_grammar(base: Grammar, schema: DbSchema) -> Grammar:
    """Replace the name placeholders with the schema's identifiers; reduced."""
    nts = {p.lhs for p in base.productions}
    for required in (TABLE_NT, COLUMN_NT):
        if required not in nts:
            raise SchemaError(
                f"base grammar lacks designated nonterminal {required}"
            )
    if not schema.tables or all(not t.columns for t in schema.tables):
        raise EmptyLanguageError("schema has no tables/columns to specialize with")

    productions = []
    for p in base.productions:
        if p.lhs not in (TABLE_NT, COLUMN_NT):
            productions.append(p)
    seen = set()

    def add(lhs, text):
        if (lhs, text) not in seen:
            seen.add((lhs, text))
            productions.append(Production(lhs, (Symbol.t(text),)))

    for t in schema.tables:
        add(TABLE_NT, t.name)
    for t in schema.tables:
        for c in t.columns:
            add(COLUMN_NT, c.name)
            add(COLUMN_NT, f"{t.name}.{c.name}")
    return reduce(Grammar(base.start, productions, version_tag=base.version_tag))


def render_schema(schema: DbSchema, with_values: bool = False) -> str:
    """Deterministic one-line rendering for model inputs:
    ``table : col1 , col2`` per table, tables joined by `` | ``;
    with_values appends up to 3 sample values per column in parentheses."""
    parts = []
    for t in schema.tables:
        cols = []
        for c in t.columns:
            if with_values and c.values:
                samples = ", ".join(str(v) for v in c.values[:3])
                cols.append(f"{c.name} ({samples})")
            else:
                cols.append(c.name)
        parts.append(f"{t.name} : " + " , ".join(cols))
    return " | ".join(parts)
