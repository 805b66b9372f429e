"""Heuristic document quality filtering for web data (Gopher-style rules).

Rules run in a fixed order and every enabled rule is measured even after the
first failure, so reports are complete enough to audit threshold choices.
Words are maximal non-whitespace runs; alphabetic means Unicode letter.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator

from .corpus import Document

__all__ = [
    "RuleConfig",
    "RuleResult",
    "QualityReport",
    "gopher_filter",
    "filter_corpus",
    "partition_corpus",
    "load_stopwords",
]

BULLET_CHARS = ("•", "‣", "▪", "-", "*")

_DATA_DIR = Path(__file__).parent / "data" / "stopwords"


@dataclass(frozen=True)
class RuleConfig:
    """Thresholds for the quality rules; each rule can be toggled off."""

    min_words: int = 50
    max_words: int = 100_000
    min_mean_word_length: float = 3.0
    max_mean_word_length: float = 10.0
    max_symbol_word_ratio: float = 0.1
    max_bullet_line_fraction: float = 0.9
    max_ellipsis_line_fraction: float = 0.3
    min_alpha_word_fraction: float = 0.8
    min_stop_words: int = 2
    # repetition rules are off by default; enable for noisy web dumps
    check_repetition: bool = False
    max_duplicate_line_fraction: float = 0.3
    max_duplicate_paragraph_fraction: float = 0.3
    enabled: tuple[str, ...] = (
        "word_count",
        "mean_word_length",
        "symbol_word_ratio",
        "bullet_line_fraction",
        "ellipsis_line_fraction",
        "alpha_word_fraction",
        "stop_words",
    )

    def active_rules(self) -> tuple[str, ...]:
        rules = self.enabled
        if self.check_repetition:
            rules = rules + ("duplicate_line_fraction", "duplicate_paragraph_fraction")
        return rules


@dataclass(frozen=True)
class RuleResult:
    rule: str
    value: float
    passed: bool


@dataclass
class QualityReport:
    doc_id: str
    results: list[RuleResult] = field(default_factory=list)

    @property
    def keep(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def first_failed(self) -> str | None:
        for r in self.results:
            if not r.passed:
                return r.rule
        return None

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "keep": self.keep,
            "first_failed": self.first_failed,
            "rules": [asdict(r) for r in self.results],
        }


@lru_cache(maxsize=None)
def load_stopwords(lang: str, data_dir: str | None = None) -> frozenset[str]:
    base = Path(data_dir) if data_dir else _DATA_DIR
    path = base / f"{'en' if lang == 'other' else lang}.txt"
    if not path.exists():
        raise FileNotFoundError(f"no stop-word list for language {lang!r}: {path}")
    return frozenset(
        w.strip().lower()
        for w in path.read_text(encoding="utf-8").splitlines()
        if w.strip()
    )


def _ellipsis_count(s: str) -> int:
    return s.count("…") + s.count("...")


def _strip_edges(word: str) -> str:
    return word.strip("\"'.,;:!?()[]{}«»“”‘’-")


def gopher_filter(doc: Document, rules: RuleConfig | None = None,
                  stopwords: frozenset[str] | None = None) -> QualityReport:
    """Evaluate every enabled rule against one document."""
    rules = rules or RuleConfig()
    if stopwords is None:
        stopwords = load_stopwords(doc.lang)

    words = doc.text.split()
    num_words = len(words)
    lines = [ln for ln in doc.text.splitlines() if ln.strip()]
    num_lines = len(lines)

    measured: dict[str, tuple[float, bool]] = {}

    measured["word_count"] = (
        float(num_words), rules.min_words <= num_words <= rules.max_words)

    mean_len = sum(len(w) for w in words) / num_words if num_words else 0.0
    measured["mean_word_length"] = (
        mean_len, rules.min_mean_word_length <= mean_len <= rules.max_mean_word_length)

    symbols = doc.text.count("#") + _ellipsis_count(doc.text)
    symbol_ratio = symbols / num_words if num_words else 1.0
    measured["symbol_word_ratio"] = (
        symbol_ratio, symbol_ratio <= rules.max_symbol_word_ratio)

    bullet_frac = (
        sum(1 for ln in lines if ln.lstrip().startswith(BULLET_CHARS)) / num_lines
        if num_lines else 0.0)
    measured["bullet_line_fraction"] = (
        bullet_frac, bullet_frac <= rules.max_bullet_line_fraction)

    ellipsis_frac = (
        sum(1 for ln in lines if ln.rstrip().endswith(("…", "..."))) / num_lines
        if num_lines else 0.0)
    measured["ellipsis_line_fraction"] = (
        ellipsis_frac, ellipsis_frac <= rules.max_ellipsis_line_fraction)

    alpha_frac = (
        sum(1 for w in words if any(c.isalpha() for c in w)) / num_words
        if num_words else 0.0)
    measured["alpha_word_fraction"] = (
        alpha_frac, alpha_frac >= rules.min_alpha_word_fraction)

    distinct_stops = {w for w in (_strip_edges(w).lower() for w in words) if w in stopwords}
    measured["stop_words"] = (
        float(len(distinct_stops)), len(distinct_stops) >= rules.min_stop_words)

    if rules.check_repetition:
        dup_line = _duplicate_fraction(lines)
        measured["duplicate_line_fraction"] = (
            dup_line, dup_line <= rules.max_duplicate_line_fraction)
        paragraphs = [p.strip() for p in doc.text.split("\n\n") if p.strip()]
        dup_para = _duplicate_fraction(paragraphs)
        measured["duplicate_paragraph_fraction"] = (
            dup_para, dup_para <= rules.max_duplicate_paragraph_fraction)

    report = QualityReport(doc_id=doc.id)
    for rule in rules.active_rules():
        value, passed = measured[rule]
        report.results.append(RuleResult(rule=rule, value=value, passed=passed))
    return report


def _duplicate_fraction(items: list[str]) -> float:
    if not items:
        return 0.0
    return (len(items) - len(set(items))) / len(items)


def filter_corpus(
    docs: Iterable[Document],
    rules: RuleConfig | None = None,
    stopword_dir: str | None = None,
) -> Iterator[tuple[Document, QualityReport]]:
    """Yield (doc, report) pairs; callers partition on report.keep.

    Input order is preserved, so the kept and rejected streams each keep
    their relative order.
    """
    rules = rules or RuleConfig()
    for doc in docs:
        stopwords = load_stopwords(doc.lang, stopword_dir)
        yield doc, gopher_filter(doc, rules, stopwords)


def partition_corpus(
    docs: Iterable[Document],
    rules: RuleConfig | None = None,
    stopword_dir: str | None = None,
) -> tuple[list[Document], list[tuple[Document, QualityReport]]]:
    """Materialized split: (kept documents, rejected documents with reports)."""
    kept: list[Document] = []
    rejected: list[tuple[Document, QualityReport]] = []
    for doc, report in filter_corpus(docs, rules, stopword_dir):
        if report.keep:
            kept.append(doc)
        else:
            rejected.append((doc, report))
    return kept, rejected
