"""Document vectors: precomputed-file loading and a hashed fallback embedder.

The pipeline consumes vectors; it never trains them. When no precomputed
vectors are available, ``embed_fallback`` turns raw text into a deterministic
signed bag-of-words hash vector so the whole system stays runnable and
testable offline.
"""

from __future__ import annotations

import hashlib
import json
import unicodedata
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .errors import (
    BadDimensionError,
    DimensionMismatchError,
    DuplicateIdError,
    EmptyTextError,
    ParseError,
)


@dataclass(frozen=True)
class VectorSource:
    """Where document vectors come from.

    kind is "fallback" (hashed bag of words, needs dim+seed) or "file"
    (JSON Lines of precomputed vectors, needs path+dim).
    """

    kind: str = "fallback"
    dim: int = 64
    seed: int = 7
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("fallback", "file"):
            raise ValueError(f"unknown vector source kind {self.kind!r}")
        if self.dim < 2:
            raise BadDimensionError(f"vector dimension must be >= 2, got {self.dim}")
        if self.kind == "file" and not self.path:
            raise ValueError("vector source kind 'file' requires a path")


def _strip_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]


def tokenize(text: str) -> List[str]:
    """Lowercase, split on whitespace, strip surrounding punctuation."""
    tokens = []
    for raw in text.lower().split():
        tok = _strip_punct(raw)
        if tok:
            tokens.append(tok)
    return tokens


def token_slot(token: str, dim: int, seed: int) -> "tuple[int, float]":
    """Seeded hash of one token: a bucket index in [0, dim) and a sign.

    Uses blake2b so the mapping is stable across platforms and runs
    (Python's builtin hash() is salted per process and would not be).
    """
    salt = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=9, salt=salt).digest()
    index = int.from_bytes(digest[:8], "big") % dim
    sign = 1.0 if digest[8] % 2 == 0 else -1.0
    return index, sign


def embed_fallback(text: str, dim: int, seed: int) -> np.ndarray:
    """Signed hashed unigram counts, L2-normalized.

    Deterministic in (text tokens, dim, seed); token order does not matter.
    Raises EmptyTextError when nothing survives tokenization and
    BadDimensionError when dim < 2.
    """
    if dim < 2:
        raise BadDimensionError(f"vector dimension must be >= 2, got {dim}")
    tokens = tokenize(text)
    if not tokens:
        raise EmptyTextError("no tokens survived tokenization")
    vec = np.zeros(dim, dtype=np.float64)
    for tok in sorted(tokens):
        index, sign = token_slot(tok, dim, seed)
        vec[index] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        # Only possible if opposite-signed tokens cancel bucket-for-bucket.
        raise EmptyTextError("token hashes cancelled to a zero vector")
    return vec / norm


def load_vectors(path, expected_dim: int) -> Dict[str, np.ndarray]:
    """Load a JSON Lines vector file: one {"id": ..., "vector": [...]} per line.

    Every vector must have dimension expected_dim; duplicate ids are
    rejected. Errors carry the 1-based line number.
    """
    vectors: Dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            if not isinstance(record, dict) or "id" not in record or "vector" not in record:
                raise ParseError("expected an object with 'id' and 'vector'", line=lineno)
            article_id = record["id"]
            if not isinstance(article_id, str):
                raise ParseError("'id' must be a string", line=lineno)
            try:
                vec = np.asarray(record["vector"], dtype=np.float64)
            except (TypeError, ValueError) as exc:
                raise ParseError("'vector' must be a list of numbers", line=lineno) from exc
            if vec.ndim != 1 or vec.shape[0] != expected_dim:
                raise DimensionMismatchError(
                    f"vector for id {article_id!r} has dimension "
                    f"{vec.shape[0] if vec.ndim == 1 else vec.shape}, expected {expected_dim}"
                )
            if not np.all(np.isfinite(vec)):
                raise ParseError(f"vector for id {article_id!r} has non-finite entries", line=lineno)
            if article_id in vectors:
                raise DuplicateIdError(f"id {article_id!r} appears more than once")
            vectors[article_id] = vec
    return vectors
