"""Lexer for a Java-like token grammar.

Produces a flat token stream with byte spans into the original source.
Comments are dropped during scanning; everything else (keywords,
identifiers, operators, punctuation, literals) becomes exactly one
token. There is no parser: downstream masking and abstraction are
purely lexical.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidCharacter, UnterminatedLiteral

KEYWORD = "keyword"
IDENTIFIER = "identifier"
OPERATOR = "operator"
PUNCTUATION = "punctuation"
STRING_LIT = "string-lit"
CHAR_LIT = "char-lit"
INT_LIT = "int-lit"
FLOAT_LIT = "float-lit"

# Reserved words of the target grammar; true/false/null are reserved
# literals and classified as keywords so they survive abstraction.
KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const
    continue default do double else enum extends final finally float
    for goto if implements import instanceof int interface long native
    new package private protected public return short static strictfp
    super switch synchronized this throw throws transient try void
    volatile while var record yield sealed permits true false null""".split()
)

PUNCTUATION_CHARS = frozenset("()[]{};,.@")

# Multi-character operators first: the scanner uses maximal munch.
OPERATORS = sorted(
    [
        ">>>=", ">>>", ">>=", "<<=", "->", "::",
        "==", "!=", "<=", ">=", "&&", "||", "++", "--",
        "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
        "+", "-", "*", "/", "%", "<", ">", "=", "!", "&", "|", "^",
        "~", "?", ":",
    ],
    key=len,
    reverse=True,
)

# Operators that take two expression operands; used for mask-site kinds.
BINARY_OPERATORS = frozenset(
    ["+", "-", "*", "/", "%", "<", "<=", ">", ">=", "==", "!=",
     "&&", "||", "&", "|", "^", "<<", ">>"]
)

_IDENT_START = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_$"
)
_DIGITS = frozenset("0123456789")
_WHITESPACE = frozenset(" \t\r\n\f\v")


@dataclass(frozen=True)
class Token:
    lexeme: str
    kind: str
    start: int
    end: int


@dataclass(frozen=True)
class TokenStream:
    source: str
    tokens: tuple[Token, ...]

    def lexemes(self) -> list[str]:
        return [t.lexeme for t in self.tokens]

    def __len__(self) -> int:
        return len(self.tokens)


def tokenize(source: str) -> TokenStream:
    """Lex ``source`` into a TokenStream, dropping comments.

    Raises UnterminatedLiteral for unbalanced string/char literals and
    unterminated block comments, InvalidCharacter for anything that
    starts no token.
    """
    tokens: list[Token] = []
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c in _WHITESPACE:
            i += 1
            continue
        if c == "/" and i + 1 < n and source[i + 1] == "/":
            j = i + 2
            while j < n and source[j] != "\n":
                j += 1
            i = j
            continue
        if c == "/" and i + 1 < n and source[i + 1] == "*":
            end = source.find("*/", i + 2)
            if end < 0:
                raise UnterminatedLiteral(
                    f"unterminated block comment at offset {i}"
                )
            i = end + 2
            continue
        if c == '"':
            i = _scan_quoted(source, i, '"', tokens, STRING_LIT)
            continue
        if c == "'":
            i = _scan_quoted(source, i, "'", tokens, CHAR_LIT)
            continue
        if c in _DIGITS or (c == "." and i + 1 < n and source[i + 1] in _DIGITS):
            i = _scan_number(source, i, tokens)
            continue
        if c in _IDENT_START:
            j = i + 1
            while j < n and (source[j] in _IDENT_START or source[j] in _DIGITS):
                j += 1
            lexeme = source[i:j]
            kind = KEYWORD if lexeme in KEYWORDS else IDENTIFIER
            tokens.append(Token(lexeme, kind, i, j))
            i = j
            continue
        if c in PUNCTUATION_CHARS:
            tokens.append(Token(c, PUNCTUATION, i, i + 1))
            i += 1
            continue
        matched = False
        for op in OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token(op, OPERATOR, i, i + len(op)))
                i += len(op)
                matched = True
                break
        if matched:
            continue
        raise InvalidCharacter(f"invalid character {c!r} at offset {i}")
    return TokenStream(source=source, tokens=tuple(tokens))


def _scan_quoted(source, start, quote, tokens, kind):
    i = start + 1
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\\":
            i += 2
            continue
        if c == quote:
            tokens.append(Token(source[start : i + 1], kind, start, i + 1))
            return i + 1
        if c == "\n":
            break
        i += 1
    raise UnterminatedLiteral(
        f"unterminated {quote}-literal at offset {start}"
    )


def _scan_number(source, start, tokens):
    n = len(source)
    i = start
    is_float = False
    if source.startswith(("0x", "0X", "0b", "0B"), i):
        i += 2
        while i < n and (source[i] in _DIGITS or source[i] in _IDENT_START):
            i += 1
        if i < n and source[i : i + 1] in ("l", "L"):
            i += 1
    else:
        while i < n and (source[i] in _DIGITS or source[i] == "_"):
            i += 1
        if i < n and source[i] == "." and (i + 1 >= n or source[i + 1] not in _IDENT_START or source[i + 1] in "fFdD"):
            # A dot followed by an identifier head (other than a float
            # suffix) is member access, not a float: 1.toString is two
            # tokens in no grammar we accept but `x.5` style floats are.
            is_float = True
            i += 1
            while i < n and (source[i] in _DIGITS or source[i] == "_"):
                i += 1
        if i < n and source[i] in "eE":
            j = i + 1
            if j < n and source[j] in "+-":
                j += 1
            if j < n and source[j] in _DIGITS:
                is_float = True
                i = j
                while i < n and source[i] in _DIGITS:
                    i += 1
        if i < n and source[i] in "fFdD":
            is_float = True
            i += 1
        elif i < n and source[i] in "lL":
            i += 1
    kind = FLOAT_LIT if is_float else INT_LIT
    tokens.append(Token(source[start:i], kind, start, i))
    return i


def strip_comments(source: str) -> str:
    """Remove // and /* */ comments, leaving everything else untouched.

    Independent of tokenize(): a small state machine that only tracks
    enough quoting context to avoid stripping comment-lookalikes inside
    literals. Serves as the oracle for the lexer round-trip invariant.
    """
    out: list[str] = []
    i = 0
    n = len(source)
    state = "code"  # code | string | char
    while i < n:
        c = source[i]
        if state == "code":
            if c == "/" and i + 1 < n and source[i + 1] == "/":
                while i < n and source[i] != "\n":
                    i += 1
                continue
            if c == "/" and i + 1 < n and source[i + 1] == "*":
                end = source.find("*/", i + 2)
                if end < 0:
                    raise UnterminatedLiteral(
                        f"unterminated block comment at offset {i}"
                    )
                i = end + 2
                continue
            if c == '"':
                state = "string"
            elif c == "'":
                state = "char"
            out.append(c)
            i += 1
        else:
            quote = '"' if state == "string" else "'"
            if c == "\\" and i + 1 < n:
                out.append(source[i : i + 2])
                i += 2
                continue
            if c == quote or c == "\n":
                state = "code"
            out.append(c)
            i += 1
    return "".join(out)


def reconstruct(ts: TokenStream) -> str:
    """Rebuild comment-stripped source from tokens and inter-token gaps."""
    parts: list[str] = []
    pos = 0
    for tok in ts.tokens:
        gap = ts.source[pos : tok.start]
        parts.append(_strip_gap(gap))
        parts.append(tok.lexeme)
        pos = tok.end
    parts.append(_strip_gap(ts.source[pos:]))
    return "".join(parts)


def _strip_gap(gap: str) -> str:
    # Gaps between tokens hold only whitespace and comments.
    return strip_comments(gap)
