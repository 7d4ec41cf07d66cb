"""Top-k replacement candidates for a masked token.

Two implementations of the same protocol: a deterministic builtin
predictor (operator complements, in-scope identifier frequencies,
literal neighbors) and a client for a remote masked-LM service speaking
the shared wire protocol:

    POST /v1/predict   {"sequence": "<tokens with one <mask>>", "k": int}
                    -> {"candidates": [{"token": str, "score": float}]}
    GET  /v1/health    -> {"status": "ok"}

Tokens in ``sequence`` are single-space-joined; embedded whitespace in
raw lexemes is escaped per abstraction.flatten(raw=True).
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Protocol

import requests

from .errors import MalformedResponse, MultipleMaskTokens, NoMaskToken, PredictorUnavailable

log = logging.getLogger(__name__)

MASK = "<mask>"

# Fixed-order operator families; a masked operator's candidates are the
# other members of its family.
OPERATOR_FAMILIES = (
    ["<", "<=", ">", ">=", "==", "!="],
    ["+", "-", "*", "/", "%"],
    ["&&", "||"],
    ["&", "|", "^"],
    ["<<", ">>"],
)

IDENTIFIER_SITE = "identifier"
FIELD_ACCESS_SITE = "field-access-name"
BINARY_OPERATOR_SITE = "binary-operator"
LITERAL_SITE = "literal"


@dataclass(frozen=True)
class Prediction:
    token: str
    score: float


class Predictor(Protocol):
    def predict(self, masked_seq: list[str], site_kind: str,
                scope_tokens: list[str], original: str, k: int) -> list[Prediction]:
        ...


def _check_single_mask(masked_seq: list[str]) -> None:
    count = masked_seq.count(MASK)
    if count == 0:
        raise NoMaskToken("masked sequence contains no <mask> token")
    if count > 1:
        raise MultipleMaskTokens(f"masked sequence contains {count} <mask> tokens")


def predict_builtin(masked_seq: list[str], site_kind: str,
                    scope_tokens: list[str], original: str, k: int) -> list[Prediction]:
    """Deterministic candidates for one masked site, scored 1/rank."""
    _check_single_mask(masked_seq)
    if site_kind == BINARY_OPERATOR_SITE:
        candidates = _operator_complement(original)
    elif site_kind in (IDENTIFIER_SITE, FIELD_ACCESS_SITE):
        candidates = _frequent_identifiers(scope_tokens)
    elif site_kind == LITERAL_SITE:
        candidates = _literal_neighbors(original)
    else:
        raise ValueError(f"unknown site kind {site_kind!r}")
    return [Prediction(tok, 1.0 / (rank + 1))
            for rank, tok in enumerate(candidates[:k])]


def _operator_complement(original: str) -> list[str]:
    for family in OPERATOR_FAMILIES:
        if original in family:
            return [op for op in family if op != original]
    return []


def _frequent_identifiers(scope_tokens: list[str]) -> list[str]:
    counts = Counter(scope_tokens)
    first_seen = {tok: i for i, tok in reversed(list(enumerate(scope_tokens)))}
    return sorted(counts, key=lambda t: (-counts[t], first_seen[t]))


def _literal_neighbors(original: str) -> list[str]:
    candidates = _raw_neighbors(original)
    seen: set[str] = set()
    out: list[str] = []
    for c in candidates:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def _raw_neighbors(original: str) -> list[str]:
    if original.startswith('"'):
        return ['""', '" "', "null"]
    if original.startswith("'"):
        return ["' '", "'0'", "'a'"]
    try:
        n = int(original.rstrip("lL"), 0)
        return [str(n + 1), str(n - 1), "0", "1", str(-n)]
    except ValueError:
        pass
    try:
        f = float(original.rstrip("fFdD"))
        return [_fmt(f + 1.0), _fmt(f - 1.0), "0.0", "1.0", _fmt(-f)]
    except ValueError:
        return []


def _fmt(f: float) -> str:
    text = repr(f)
    return text if "." in text or "e" in text or "n" in text else text + ".0"


class BuiltinPredictor:
    """Pure-function predictor; safe to share across workers."""

    def predict(self, masked_seq, site_kind, scope_tokens, original, k):
        return predict_builtin(masked_seq, site_kind, scope_tokens, original, k)


class RemotePredictor:
    """Client for the /v1/predict wire protocol; one in-flight request."""

    def __init__(self, endpoint: str, timeout_ms: int = 10_000):
        self.endpoint = endpoint.rstrip("/")
        self.timeout_s = timeout_ms / 1000.0
        self._session = requests.Session()

    def predict(self, masked_seq, site_kind, scope_tokens, original, k):
        return predict_remote(self.endpoint, masked_seq, k,
                              timeout_ms=int(self.timeout_s * 1000),
                              session=self._session)

    def close(self):
        self._session.close()


def predict_remote(endpoint: str, masked_seq: list[str], k: int,
                   timeout_ms: int = 10_000,
                   session: requests.Session | None = None) -> list[Prediction]:
    """Query the remote service; one retry, then PredictorUnavailable."""
    _check_single_mask(masked_seq)
    from .abstraction import flatten

    url = endpoint.rstrip("/") + "/v1/predict"
    payload = {"sequence": flatten(list(masked_seq), raw=True), "k": k}
    timeout_s = timeout_ms / 1000.0
    http = session or requests
    last_error: Exception | None = None
    for attempt in range(2):
        try:
            resp = http.post(url, json=payload, timeout=timeout_s)
            break
        except requests.RequestException as exc:
            last_error = exc
            log.warning("predict request failed (attempt %d): %s", attempt + 1, exc)
    else:
        raise PredictorUnavailable(f"{url}: {last_error}")
    if resp.status_code != 200:
        raise MalformedResponse(f"{url}: HTTP {resp.status_code}: {resp.text[:200]}")
    return _parse_candidates(resp, k, url)


def _parse_candidates(resp, k: int, url: str) -> list[Prediction]:
    try:
        body = resp.json()
    except ValueError as exc:
        raise MalformedResponse(f"{url}: non-JSON response") from exc
    candidates = body.get("candidates") if isinstance(body, dict) else None
    if not isinstance(candidates, list):
        raise MalformedResponse(f"{url}: missing candidates list")
    out: list[Prediction] = []
    for item in candidates[:k]:
        if (not isinstance(item, dict) or not isinstance(item.get("token"), str)
                or not isinstance(item.get("score"), (int, float))):
            raise MalformedResponse(f"{url}: bad candidate entry {item!r}")
        out.append(Prediction(item["token"], float(item["score"])))
    return out
