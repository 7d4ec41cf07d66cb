"""Mask-site enumeration and mutant materialization.

A mask site is one token worth replacing: an identifier use, a name on
the right of ``.``, a binary operator, or a literal. For each site the
configured predictor proposes top-k replacements; candidates equal to
the original are dropped, the rest are patched into the source and kept
only when the patched text re-lexes to a stream differing from the
original at exactly that one token. A pluggable validator then sets the
``valid`` flag (default: the lexical re-tokenization above); invalid
mutants stay in the manifest for provenance but are excluded downstream.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path
from typing import Callable, Iterable

from . import lexing
from .abstraction import AbstractedUnit, abstract, window
from .errors import PredictorUnavailable, SpanMismatch
from .lexing import IDENTIFIER, OPERATOR, TokenStream
from .predictors import (
    BINARY_OPERATOR_SITE,
    FIELD_ACCESS_SITE,
    IDENTIFIER_SITE,
    LITERAL_SITE,
    MASK,
    Predictor,
)

log = logging.getLogger(__name__)

OPERATOR_TAGS = {
    BINARY_OPERATOR_SITE: "BinaryOperatorMutator",
    IDENTIFIER_SITE: "IdentifierMutator",
    FIELD_ACCESS_SITE: "FieldAccessMutator",
    LITERAL_SITE: "LiteralMutator",
}

_LITERAL_KINDS = frozenset(
    [lexing.STRING_LIT, lexing.CHAR_LIT, lexing.INT_LIT, lexing.FLOAT_LIT]
)
# Tokens that can end an expression; an operator after one of these is
# binary, anything else (unary minus, cast context, ...) is not a site.
_EXPR_ENDERS = frozenset([")", "]"])
_STATEMENT_BOUNDARY = frozenset([";", "{", "}"])


@dataclass(frozen=True)
class MaskSite:
    token_index: int
    site_kind: str
    original: str
    statement_span: tuple[int, int]


@dataclass(frozen=True)
class Mutant:
    id: str
    file: str
    site: MaskSite
    replacement: str
    operator_tag: str
    patched_source: str
    annotated_sequence: tuple[str, ...]
    valid: bool
    original_sha256: str


def enumerate_sites(ts: TokenStream) -> list[MaskSite]:
    """All maskable sites in token-index order."""
    from .abstraction import classify_identifier

    sites: list[MaskSite] = []
    for i, tok in enumerate(ts.tokens):
        kind: str | None = None
        if tok.kind == IDENTIFIER:
            prev = ts.tokens[i - 1] if i > 0 else None
            if prev is not None and prev.lexeme == ".":
                kind = FIELD_ACCESS_SITE
            elif classify_identifier(ts, i) != "TYPE":
                kind = IDENTIFIER_SITE
        elif tok.kind == OPERATOR and tok.lexeme in lexing.BINARY_OPERATORS:
            if _is_binary_position(ts, i):
                kind = BINARY_OPERATOR_SITE
        elif tok.kind in _LITERAL_KINDS:
            kind = LITERAL_SITE
        if kind is not None:
            sites.append(
                MaskSite(
                    token_index=i,
                    site_kind=kind,
                    original=tok.lexeme,
                    statement_span=_statement_span(ts, i),
                )
            )
    return sites


def _is_binary_position(ts: TokenStream, i: int) -> bool:
    if i == 0:
        return False
    prev = ts.tokens[i - 1]
    return (
        prev.kind == IDENTIFIER
        or prev.kind in _LITERAL_KINDS
        or prev.lexeme in _EXPR_ENDERS
        or (prev.kind == lexing.KEYWORD and prev.lexeme in ("this", "true", "false", "null"))
    )


def _statement_span(ts: TokenStream, i: int) -> tuple[int, int]:
    start = i
    while start > 0 and ts.tokens[start - 1].lexeme not in _STATEMENT_BOUNDARY:
        start -= 1
    end = i
    while end < len(ts.tokens) - 1 and ts.tokens[end].lexeme not in _STATEMENT_BOUNDARY:
        end += 1
    return (start, end + 1)


def masked_sequence(
    ts: TokenStream, site: MaskSite, unit: AbstractedUnit | None = None
) -> list[str]:
    """Token sequence with the site masked; abstracted when a unit is given.

    Raw lexemes are the default query form. Passing the file's
    AbstractedUnit switches to category IDs (the abstract tokens align
    one-to-one with the stream's tokens).
    """
    seq = list(unit.abstract_tokens) if unit is not None else ts.lexemes()
    seq[site.token_index] = MASK
    return seq


def scope_identifiers(ts: TokenStream) -> list[str]:
    return [t.lexeme for t in ts.tokens if t.kind == IDENTIFIER]


def mutant_id(file: str, token_index: int, replacement: str) -> str:
    digest = hashlib.sha1(
        f"{file}\x00{token_index}\x00{replacement}".encode()
    ).hexdigest()[:10]
    stem = Path(file).stem or "unit"
    return f"{stem}_t{token_index}_{digest}"


def lexical_validator(patched_source: str) -> bool:
    """Default validator: the patched text must still lex."""
    try:
        lexing.tokenize(patched_source)
    except lexing.UnterminatedLiteral:
        return False
    except Exception:
        return False
    return True


def generate(
    ts: TokenStream,
    site: MaskSite,
    predictor: Predictor,
    k: int = 5,
    validator: Callable[[str], bool] = lexical_validator,
    file: str = "unit.java",
    unit: AbstractedUnit | None = None,
    mask_on_abstracted: bool = False,
) -> list[Mutant]:
    """Materialize up to k mutants for one site."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if unit is None:
        unit = abstract(ts)
    predictions = predictor.predict(
        masked_sequence(ts, site, unit if mask_on_abstracted else None),
        site.site_kind, scope_identifiers(ts), site.original, k,
    )
    source_sha = hashlib.sha256(ts.source.encode()).hexdigest()
    tok = ts.tokens[site.token_index]
    mutants: list[Mutant] = []
    for pred in predictions[:k]:
        if pred.token == site.original:
            continue
        patched = ts.source[: tok.start] + pred.token + ts.source[tok.end :]
        if not _single_token_diff(ts, patched, site.token_index, pred.token):
            log.debug("dropping non-single-token candidate %r at %s:%d",
                      pred.token, file, site.token_index)
            continue
        m = Mutant(
            id=mutant_id(file, site.token_index, pred.token),
            file=file,
            site=site,
            replacement=pred.token,
            operator_tag=OPERATOR_TAGS[site.site_kind],
            patched_source=patched,
            annotated_sequence=(),
            valid=validator(patched),
            original_sha256=source_sha,
        )
        m = dc_replace(m, annotated_sequence=tuple(annotate(m, unit)))
        mutants.append(m)
    return mutants


def _single_token_diff(ts: TokenStream, patched: str, index: int, replacement: str) -> bool:
    try:
        patched_ts = lexing.tokenize(patched)
    except Exception:
        return False
    if len(patched_ts.tokens) != len(ts.tokens):
        return False
    diffs = [
        i for i, (a, b) in enumerate(zip(ts.tokens, patched_ts.tokens))
        if a.lexeme != b.lexeme
    ]
    return diffs == [index] and patched_ts.tokens[index].lexeme == replacement


def annotate(m: Mutant, u: AbstractedUnit) -> list[str]:
    """Abstracted mutant sequence with one @<tag> annotation token.

    The annotation lands at the start of the mutated token's enclosing
    statement and the result is windowed to 150 tokens centered on the
    annotation. The unit's symbol table is extended (copy-on-write) when
    the replacement introduces a lexeme the original never used.
    """
    index = m.site.token_index
    if index >= len(u.abstract_tokens):
        raise SpanMismatch(
            f"site index {index} outside abstracted unit of length "
            f"{len(u.abstract_tokens)}"
        )
    if u.lexeme_for(u.abstract_tokens[index]) != m.site.original:
        raise SpanMismatch(
            f"abstracted token at {index} maps to "
            f"{u.lexeme_for(u.abstract_tokens[index])!r}, site says "
            f"{m.site.original!r}"
        )
    tokens = list(u.abstract_tokens)
    tokens[index] = _abstract_replacement(m, u)
    start = m.site.statement_span[0]
    tokens.insert(start, f"@{m.operator_tag}")
    return window(tokens, start, 150)


def _abstract_replacement(m: Mutant, u: AbstractedUnit) -> str:
    kind = m.site.site_kind
    replacement = m.replacement
    if kind == BINARY_OPERATOR_SITE or replacement in u.idioms:
        return replacement
    if kind in (IDENTIFIER_SITE, FIELD_ACCESS_SITE):
        if replacement in lexing.KEYWORDS:
            return replacement
        category = "TYPE" if replacement[0].isupper() else "VAR"
    else:
        category = _literal_category(replacement)
        if category is None:
            return replacement
    table = u.symbol_table.get(category, {})
    for abstract_id, lexeme in table.items():
        if lexeme == replacement:
            return abstract_id
    return f"{category}_{len(table) + 1}"


def _literal_category(lexeme: str) -> str | None:
    if lexeme.startswith('"'):
        return "STRING"
    if lexeme.startswith("'"):
        return "CHAR"
    try:
        int(lexeme.rstrip("lL"), 0)
        return "INT"
    except ValueError:
        pass
    try:
        float(lexeme.rstrip("fFdD"))
        return "FLOAT"
    except ValueError:
        return None


def generate_all(
    ts: TokenStream,
    predictor: Predictor,
    k: int = 5,
    validator: Callable[[str], bool] = lexical_validator,
    file: str = "unit.java",
    mask_on_abstracted: bool = False,
) -> tuple[list[Mutant], list[dict]]:
    """Generate mutants for every site; predictor failures skip the site.

    Returns (mutants, skips) where each skip records the site and the
    diagnostic. A predictor outage never aborts the batch.
    """
    unit = abstract(ts)
    mutants: list[Mutant] = []
    skips: list[dict] = []
    for site in enumerate_sites(ts):
        try:
            mutants.extend(
                generate(ts, site, predictor, k=k, validator=validator,
                         file=file, unit=unit,
                         mask_on_abstracted=mask_on_abstracted)
            )
        except PredictorUnavailable as exc:
            log.warning("skipping site %s:%d (%s)", file, site.token_index, exc)
            skips.append(
                {"file": file, "token_index": site.token_index,
                 "site_kind": site.site_kind, "error": str(exc)}
            )
    return mutants, skips


# --- manifest I/O -----------------------------------------------------------

def manifest_row(m: Mutant) -> dict:
    return {
        "id": m.id,
        "file": m.file,
        "token_index": m.site.token_index,
        "site_kind": m.site.site_kind,
        "original": m.site.original,
        "replacement": m.replacement,
        "operator_tag": m.operator_tag,
        "valid": m.valid,
        "original_sha256": m.original_sha256,
        "statement_start": m.site.statement_span[0],
    }


def write_manifest(mutants: Iterable[Mutant], path: Path) -> None:
    rows = sorted((manifest_row(m) for m in mutants), key=lambda r: r["id"])
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def write_sequences(mutants: Iterable[Mutant], path: Path) -> None:
    rows = sorted(
        ({"mutant_id": m.id, "tokens": list(m.annotated_sequence)} for m in mutants),
        key=lambda r: r["mutant_id"],
    )
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def write_patched_tree(mutants: Iterable[Mutant], out_dir: Path) -> None:
    """Patched sources at out_dir/<mutant_id>/<original_relative_path>."""
    for m in mutants:
        dest = out_dir / m.id / m.file
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(m.patched_source, encoding="utf-8")


def read_manifest(path: Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows
