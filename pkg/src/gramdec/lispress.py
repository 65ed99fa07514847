"""S-expression parsing, canonical serialization, and tree-match metric.

Atoms are either bare symbols (any run of characters outside whitespace,
parentheses and double quotes) or quoted strings honoring \\" and \\\\;
quoted atoms keep their quotes so canonical form round-trips exactly.
Equality is structural only: no symbol aliasing, no literal normalization.
"""

from __future__ import annotations

from .errors import SexpError

# A SexpNode is either an atom (str) or a list of SexpNodes.
SexpNode = "str | list"

_DELIMS = set('() \t\n\r"')


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in " \t\n\r":
            i += 1
        elif c in "()":
            tokens.append(c)
            i += 1
        elif c == '"':
            j = i + 1
            buf = ['"']
            while True:
                if j >= n:
                    raise SexpError(f"unterminated string starting at offset {i}")
                ch = text[j]
                if ch == "\\":
                    if j + 1 >= n or text[j + 1] not in '"\\':
                        raise SexpError(f"bad escape at offset {j}")
                    buf.append(text[j : j + 2])
                    j += 2
                    continue
                buf.append(ch)
                j += 1
                if ch == '"':
                    break
            tokens.append("".join(buf))
            i = j
        else:
            j = i
            while j < n and text[j] not in _DELIMS:
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def parse_sexp(text: str):
    """Parse one s-expression; trailing garbage is an error."""
    tokens = _tokenize(text)
    if not tokens:
        raise SexpError("empty input")
    pos = 0

    def parse_node():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            children = []
            while True:
                if pos >= len(tokens):
                    raise SexpError("unbalanced parentheses: missing ')'")
                if tokens[pos] == ")":
                    pos += 1
                    return children
                children.append(parse_node())
        if tok == ")":
            raise SexpError("unbalanced parentheses: unexpected ')'")
        return tok

    node = parse_node()
    if pos != len(tokens):
        raise SexpError(f"trailing garbage after expression: {tokens[pos]!r}")
    return node


def canonical(n) -> str:
    """Whitespace-normalized form: single spaces, tight parentheses."""
    if isinstance(n, str):
        if not n:
            raise SexpError("empty atom")
        return n
    return "(" + " ".join(canonical(c) for c in n) + ")"


def sexp_equal(a, b) -> bool:
    if isinstance(a, str) or isinstance(b, str):
        return a == b
    return len(a) == len(b) and all(sexp_equal(x, y) for x, y in zip(a, b))


def lispress_equal(a: str, b: str) -> bool:
    """Whether two program strings parse to structurally equal trees.

    Raises SexpError if either side fails to parse; the evaluation layer
    catches that and counts the prediction as a flagged parse failure.
    """
    return sexp_equal(parse_sexp(a), parse_sexp(b))
