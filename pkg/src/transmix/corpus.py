"""Document model, streaming JSONL ingestion/egress, and corpus statistics.

The interchange format is JSONL: one ``{"id", "lang", "text", "source"?}``
object per line, with an optional first header line
``{"_header": true, "tokenizer_fingerprint": "..."}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .tokenizer import TokenCounter

__all__ = [
    "LANGUAGES",
    "Document",
    "ReadError",
    "CorpusFormatError",
    "read_corpus",
    "read_header",
    "write_corpus",
    "CorpusStats",
    "LanguageStats",
    "compute_stats",
    "implied_doc_count",
    "consistent",
]

LANGUAGES = ("en", "fr", "de", "es", "other")


class CorpusFormatError(ValueError):
    """Raised on malformed corpus input in strict mode."""


@dataclass(frozen=True)
class Document:
    """One corpus text. Immutable, safe to hand between workers."""

    id: str
    lang: str
    text: str
    source: str | None = None
    token_count: int | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("document id must be non-empty")
        if self.lang not in LANGUAGES:
            raise ValueError(f"unknown lang {self.lang!r}, expected one of {LANGUAGES}")
        if self.token_count is not None and self.token_count < 0:
            raise ValueError("token_count cache must be non-negative")

    def to_json(self) -> str:
        obj: dict = {"id": self.id, "lang": self.lang, "text": self.text}
        if self.source is not None:
            obj["source"] = self.source
        if self.token_count is not None:
            obj["token_count"] = self.token_count
        return json.dumps(obj, ensure_ascii=False)


@dataclass(frozen=True)
class ReadError:
    """One malformed input line, reported instead of silently dropped."""

    line_no: int
    message: str
    raw: str


def _parse_line(line: str) -> Document:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("line is not a JSON object")
    missing = [k for k in ("id", "lang", "text") if k not in obj]
    if missing:
        raise ValueError(f"missing fields: {', '.join(missing)}")
    return Document(
        id=str(obj["id"]),
        lang=obj["lang"],
        text=obj["text"],
        source=obj.get("source"),
        token_count=obj.get("token_count"),
    )


def read_header(path: str | Path) -> dict | None:
    """Return the header object of a corpus file, if it has one."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if not first.strip():
        return None
    try:
        obj = json.loads(first)
    except json.JSONDecodeError:
        return None
    if isinstance(obj, dict) and obj.get("_header"):
        return obj
    return None


def read_corpus(
    path: str | Path,
    strict: bool = False,
    on_error: Callable[[ReadError], None] | None = None,
) -> Iterator[Document]:
    """Stream Documents from a JSONL file without loading it whole.

    Malformed lines are reported through ``on_error`` and skipped; in strict
    mode the first one aborts the stream with CorpusFormatError, and id
    uniqueness is enforced as well. A leading header line is skipped
    transparently (see read_header).
    """
    seen_ids: set[str] | None = set() if strict else None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line_no == 1:
                try:
                    obj = json.loads(line)
                    if isinstance(obj, dict) and obj.get("_header"):
                        continue
                except json.JSONDecodeError:
                    pass
            try:
                doc = _parse_line(line)
                if seen_ids is not None:
                    if doc.id in seen_ids:
                        raise ValueError(f"duplicate document id {doc.id!r}")
                    seen_ids.add(doc.id)
                yield doc
            except (ValueError, KeyError) as exc:
                if strict:
                    raise CorpusFormatError(f"{path}:{line_no}: {exc}") from exc
                if on_error is not None:
                    on_error(ReadError(line_no=line_no, message=str(exc), raw=line))


def write_corpus(
    path: str | Path,
    docs: Iterable[Document],
    tokenizer_fingerprint: str | None = None,
) -> int:
    """Write documents as JSONL; returns the number written."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        if tokenizer_fingerprint is not None:
            fh.write(json.dumps(
                {"_header": True, "tokenizer_fingerprint": tokenizer_fingerprint}) + "\n")
        for doc in docs:
            fh.write(doc.to_json() + "\n")
            n += 1
    return n


@dataclass
class LanguageStats:
    token_total: int = 0
    doc_count: int = 0

    @property
    def avg_doc_length(self) -> float:
        return self.token_total / self.doc_count if self.doc_count else 0.0


@dataclass
class CorpusStats:
    """Per-language token totals, document counts, and average lengths."""

    per_language: dict[str, LanguageStats] = field(default_factory=dict)
    tokenizer_fingerprint: str | None = None

    @property
    def overall(self) -> LanguageStats:
        total = LanguageStats()
        for stats in self.per_language.values():
            total.token_total += stats.token_total
            total.doc_count += stats.doc_count
        return total

    def to_report(self) -> dict:
        def row(s: LanguageStats) -> dict:
            return {
                "tokens": s.token_total,
                "docs": s.doc_count,
                "avg_doc_length": round(s.avg_doc_length, 1),
            }

        report = {lang: row(s) for lang, s in sorted(self.per_language.items())}
        report["total"] = row(self.overall)
        if self.tokenizer_fingerprint:
            report["tokenizer_fingerprint"] = self.tokenizer_fingerprint
        return report


def compute_stats(
    docs: Iterable[Document],
    counter: TokenCounter,
    use_cached_counts: bool = False,
) -> CorpusStats:
    """Single-pass per-language statistics.

    Cached token counts are advisory: they are only trusted when the caller
    has checked the corpus header fingerprint against the active counter.
    """
    stats = CorpusStats(tokenizer_fingerprint=counter.fingerprint)
    for doc in docs:
        n = doc.token_count if (use_cached_counts and doc.token_count is not None) \
            else counter.count(doc.text)
        lang_stats = stats.per_language.setdefault(doc.lang, LanguageStats())
        lang_stats.token_total += n
        lang_stats.doc_count += 1
    return stats


def implied_doc_count(token_total: float, avg_doc_length: float) -> float:
    """Document count implied by a (token total, average length) pair."""
    if avg_doc_length <= 0:
        raise ValueError("avg_doc_length must be positive")
    return token_total / avg_doc_length


def consistent(token_total: float, doc_count: int, avg_doc_length: float) -> bool:
    """Identity check: avg x count must equal the total within half a token per doc."""
    return abs(avg_doc_length * doc_count - token_total) <= doc_count * 0.5
