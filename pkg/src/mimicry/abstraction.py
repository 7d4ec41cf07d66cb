"""Token abstraction: user-defined names and literals become category IDs.

Identifiers and literals are replaced with ``CATEGORY_n`` tokens so the
downstream sequence models see a small, reusable vocabulary. Keywords,
operators, punctuation, and an explicit idiom list stay verbatim. The
mapping is recorded in a per-category symbol table so the original
lexeme sequence can always be recovered.

Classification is heuristic and purely lexical:

* an identifier right after ``new``/``class``/``extends``/``implements``/
  ``throws``, or starting with an uppercase letter, is a TYPE;
* otherwise an identifier immediately followed by ``(`` is a METHOD;
* every other identifier is a VAR;
* literals map to STRING/CHAR/INT/FLOAT by token kind.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import lexing
from .errors import IndexOutOfRange
from .lexing import TokenStream

CATEGORIES = ("TYPE", "METHOD", "VAR", "STRING", "CHAR", "INT", "FLOAT")

# Ubiquitous literals that would only add noise as abstract IDs. `-1`
# never matches a single token (it lexes as two) but is kept for
# symmetry with common idiom configs.
DEFAULT_IDIOMS = frozenset(["0", "1", "-1", '""', "null", "true", "false"])

_TYPE_CONTEXT = frozenset(["new", "class", "extends", "implements", "throws"])

_LITERAL_CATEGORY = {
    lexing.STRING_LIT: "STRING",
    lexing.CHAR_LIT: "CHAR",
    lexing.INT_LIT: "INT",
    lexing.FLOAT_LIT: "FLOAT",
}


@dataclass
class AbstractedUnit:
    abstract_tokens: list[str]
    # category -> {id: lexeme}; ids are "CATEGORY_n", n assigned in
    # first-occurrence order and reused for repeated lexemes.
    symbol_table: dict[str, dict[str, str]]
    idioms: frozenset[str] = field(default_factory=frozenset)

    def lexeme_for(self, abstract_token: str) -> str:
        """Map one abstract token back to its lexeme (identity if verbatim)."""
        category, _, index = abstract_token.rpartition("_")
        if category in self.symbol_table and index.isdigit():
            return self.symbol_table[category].get(abstract_token, abstract_token)
        return abstract_token

    def deabstract(self) -> list[str]:
        return [self.lexeme_for(t) for t in self.abstract_tokens]

    def to_json(self) -> str:
        doc = {
            "tokens": self.abstract_tokens,
            "symbols": {c: dict(m) for c, m in sorted(self.symbol_table.items())},
            "idioms": sorted(self.idioms),
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AbstractedUnit":
        doc = json.loads(text)
        return cls(
            abstract_tokens=list(doc["tokens"]),
            symbol_table={c: dict(m) for c, m in doc["symbols"].items()},
            idioms=frozenset(doc["idioms"]),
        )


def classify_identifier(ts: TokenStream, index: int) -> str:
    """TYPE / METHOD / VAR for the identifier token at ``index``."""
    tok = ts.tokens[index]
    prev = ts.tokens[index - 1] if index > 0 else None
    if prev is not None and prev.kind == lexing.KEYWORD and prev.lexeme in _TYPE_CONTEXT:
        return "TYPE"
    if tok.lexeme[0].isupper():
        return "TYPE"
    nxt = ts.tokens[index + 1] if index + 1 < len(ts.tokens) else None
    if nxt is not None and nxt.lexeme == "(":
        return "METHOD"
    return "VAR"


def abstract(ts: TokenStream, idioms: frozenset[str] | set[str] = frozenset()) -> AbstractedUnit:
    """Abstract a token stream into category IDs plus a symbol table."""
    idioms = frozenset(idioms)
    table: dict[str, dict[str, str]] = {c: {} for c in CATEGORIES}
    assigned: dict[str, dict[str, str]] = {c: {} for c in CATEGORIES}  # lexeme -> id
    out: list[str] = []
    for i, tok in enumerate(ts.tokens):
        if tok.kind in (lexing.KEYWORD, lexing.OPERATOR, lexing.PUNCTUATION):
            out.append(tok.lexeme)
            continue
        if tok.lexeme in idioms:
            out.append(tok.lexeme)
            continue
        if tok.kind == lexing.IDENTIFIER:
            category = classify_identifier(ts, i)
        else:
            category = _LITERAL_CATEGORY[tok.kind]
        out.append(_assign(table, assigned, category, tok.lexeme))
    return AbstractedUnit(
        abstract_tokens=out,
        symbol_table={c: m for c, m in table.items() if m},
        idioms=idioms,
    )


def _assign(table, assigned, category: str, lexeme: str) -> str:
    existing = assigned[category].get(lexeme)
    if existing is not None:
        return existing
    abstract_id = f"{category}_{len(assigned[category]) + 1}"
    assigned[category][lexeme] = abstract_id
    table[category][abstract_id] = lexeme
    return abstract_id


def flatten(tokens: list[str], raw: bool = False) -> str:
    """Join tokens with single spaces.

    Abstracted sequences are whitespace-free by construction. ``raw``
    mode accepts arbitrary lexemes (string literals may embed spaces)
    and escapes whitespace so the token list survives a split on " ".
    """
    if raw:
        tokens = [_escape_raw(t) for t in tokens]
    else:
        for t in tokens:
            if any(ws in t for ws in (" ", "\t", "\n", "\r")):
                raise ValueError(
                    f"token {t!r} contains whitespace; use raw=True"
                )
    return " ".join(tokens)


def _escape_raw(token: str) -> str:
    return (
        token.replace("\\", "\\\\")
        .replace(" ", "\\s")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def unescape_raw(token: str) -> str:
    out: list[str] = []
    i = 0
    mapping = {"s": " ", "t": "\t", "n": "\n", "r": "\r", "\\": "\\"}
    while i < len(token):
        c = token[i]
        if c == "\\" and i + 1 < len(token) and token[i + 1] in mapping:
            out.append(mapping[token[i + 1]])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def window(seq: list, center_index: int, max_len: int = 150) -> list:
    """Contiguous slice of at most ``max_len`` tokens containing the center.

    The slice starts at clamp(center - floor(max_len/2), 0, len - w)
    where w = min(len, max_len), so the window hugs the sequence edges
    instead of shrinking.
    """
    if max_len < 1:
        raise IndexOutOfRange(f"max_len must be >= 1, got {max_len}")
    if not 0 <= center_index < len(seq):
        raise IndexOutOfRange(
            f"center_index {center_index} outside sequence of length {len(seq)}"
        )
    width = min(len(seq), max_len)
    start = center_index - max_len // 2
    start = max(0, min(start, len(seq) - width))
    return list(seq[start : start + width])
