"""MinHash near-duplicate detection with LSH banding.

Texts are normalized (lowercased, punctuation stripped, whitespace
collapsed) and shingled into word 5-grams hashed to 64 bits. Signatures are
128 per-permutation minima; banding at 16 bands x 8 rows generates candidate
pairs, which are confirmed against the similarity threshold before
union-find clustering. All randomness derives from one seed, recorded in the
cluster manifest so runs are comparable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Document

__all__ = [
    "normalize_words",
    "shingle_set",
    "MinHashSignature",
    "signature",
    "estimate_jaccard",
    "exact_jaccard",
    "LshIndex",
    "dedup_corpus",
    "DedupResult",
]

NUM_HASHES = 128
BANDS = 16
ROWS = 8
SHINGLE_SIZE = 5


def normalize_words(text: str) -> list[str]:
    """Lowercase, strip punctuation/symbols, collapse whitespace."""
    cleaned = []
    for ch in text.lower():
        if ch.isalnum():
            cleaned.append(ch)
        elif ch.isspace():
            cleaned.append(" ")
        # everything else dropped
    return "".join(cleaned).split()


def _hash64(s: str) -> int:
    return int.from_bytes(
        hashlib.blake2b(s.encode("utf-8"), digest_size=8).digest(), "little")


def shingle_set(text: str, n: int = SHINGLE_SIZE) -> set[int]:
    """64-bit hashes of normalized word n-grams.

    Documents shorter than n words fall back to the singleton shingle of the
    whole normalized text.
    """
    words = normalize_words(text)
    if not words:
        return set()
    if len(words) < n:
        return {_hash64(" ".join(words))}
    return {_hash64(" ".join(words[i:i + n])) for i in range(len(words) - n + 1)}


@dataclass(frozen=True)
class MinHashSignature:
    """128 per-permutation minima over a document's shingle set."""

    values: tuple[int, ...]
    seed: int

    def __post_init__(self) -> None:
        if len(self.values) != NUM_HASHES:
            raise ValueError(f"signature must have {NUM_HASHES} values")


_param_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _hash_params(seed: int, num_hashes: int = NUM_HASHES) -> tuple[np.ndarray, np.ndarray]:
    cached = _param_cache.get(seed)
    if cached is None:
        rng = np.random.default_rng(seed)
        # odd multipliers for a multiply-shift family on the 2^64 ring
        a = rng.integers(1, 2**63, size=num_hashes, dtype=np.uint64) * np.uint64(2) + np.uint64(1)
        b = rng.integers(0, 2**63, size=num_hashes, dtype=np.uint64)
        cached = _param_cache[seed] = (a, b)
    return cached


def signature(doc: Document | str, seed: int = 0,
              shingle_size: int = SHINGLE_SIZE) -> MinHashSignature:
    """MinHash signature of a document (or raw text)."""
    text = doc.text if isinstance(doc, Document) else doc
    shingles = shingle_set(text, shingle_size)
    if not shingles:
        raise ValueError("cannot sign a document that is empty after normalization")
    a, b = _hash_params(seed)
    x = np.fromiter(shingles, dtype=np.uint64, count=len(shingles))
    with np.errstate(over="ignore"):
        hashed = a[:, None] * x[None, :] + b[:, None]
    return MinHashSignature(values=tuple(int(v) for v in hashed.min(axis=1)), seed=seed)


def estimate_jaccard(a: MinHashSignature, b: MinHashSignature) -> float:
    """Fraction of agreeing signature positions; unbiased Jaccard estimate."""
    if a.seed != b.seed:
        raise ValueError(f"signatures use different seeds ({a.seed} vs {b.seed})")
    return sum(1 for x, y in zip(a.values, b.values) if x == y) / NUM_HASHES


def exact_jaccard(text_a: str, text_b: str, n: int = SHINGLE_SIZE) -> float:
    sa, sb = shingle_set(text_a, n), shingle_set(text_b, n)
    if not sa and not sb:
        return 1.0
    union = len(sa | sb)
    return len(sa & sb) / union if union else 0.0


class LshIndex:
    """Banded index over signatures: 16 bands x 8 rows by default.

    Two documents become a candidate pair iff all rows of some band agree.
    """

    def __init__(self, bands: int = BANDS, rows: int = ROWS) -> None:
        if bands * rows != NUM_HASHES:
            raise ValueError(f"bands*rows must equal {NUM_HASHES}")
        self.bands = bands
        self.rows = rows
        self._tables: list[dict[tuple[int, ...], list[str]]] = [
            defaultdict(list) for _ in range(bands)
        ]

    def add(self, doc_id: str, sig: MinHashSignature) -> None:
        for band in range(self.bands):
            key = sig.values[band * self.rows:(band + 1) * self.rows]
            self._tables[band][key].append(doc_id)

    def candidate_pairs(self) -> set[tuple[str, str]]:
        pairs: set[tuple[str, str]] = set()
        for table in self._tables:
            for bucket in table.values():
                if len(bucket) < 2:
                    continue
                bucket = sorted(set(bucket))
                for i in range(len(bucket)):
                    for j in range(i + 1, len(bucket)):
                        pairs.add((bucket[i], bucket[j]))
        return pairs


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller id wins so clustering is input-order invariant
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


@dataclass
class DedupResult:
    kept_ids: list[str]
    removed_ids: set[str]
    clusters: list[dict] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def write_manifest(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"_header": True, **self.params}) + "\n")
            for cluster in self.clusters:
                fh.write(json.dumps(cluster, ensure_ascii=False) + "\n")


def dedup_corpus(
    docs: Sequence[Document] | Iterable[Document],
    threshold: float = 0.8,
    seed: int = 0,
    exact: bool = False,
    bands: int = BANDS,
    rows: int = ROWS,
    shingle_size: int = SHINGLE_SIZE,
) -> DedupResult:
    """Cluster near-duplicates and keep one representative per cluster.

    Candidates from the LSH index are confirmed iff their similarity exceeds
    the threshold (signature estimate by default; exact shingle Jaccard when
    ``exact`` is set, for audits). Confirmed pairs are merged by union-find
    and the lexicographically smallest id of each cluster is kept, which also
    makes the kept set independent of input order. Each language is deduped
    independently, so translations of one document into several languages are
    all kept. Documents that are empty after normalization are kept
    unconditionally.
    """
    docs = list(docs)
    seen: set[str] = set()
    groups: dict[str, list[Document]] = defaultdict(list)
    for doc in docs:
        if doc.id in seen:
            raise ValueError(f"duplicate document id {doc.id!r}")
        seen.add(doc.id)
        groups[doc.lang].append(doc)

    removed: set[str] = set()
    clusters: list[dict] = []
    for lang in sorted(groups):
        lang_removed, lang_clusters = _dedup_group(
            groups[lang], threshold, seed, exact, bands, rows, shingle_size)
        removed |= lang_removed
        clusters.extend(lang_clusters)

    kept_ids = [doc.id for doc in docs if doc.id not in removed]
    params = {
        "seed": seed,
        "threshold": threshold,
        "num_hashes": NUM_HASHES,
        "bands": bands,
        "rows": rows,
        "shingle_size": shingle_size,
        "verification": "exact" if exact else "estimate",
    }
    return DedupResult(kept_ids=kept_ids, removed_ids=removed,
                       clusters=clusters, params=params)


def _dedup_group(
    docs: list[Document],
    threshold: float,
    seed: int,
    exact: bool,
    bands: int,
    rows: int,
    shingle_size: int,
) -> tuple[set[str], list[dict]]:
    by_id = {doc.id: doc for doc in docs}
    index = LshIndex(bands=bands, rows=rows)
    sigs: dict[str, MinHashSignature] = {}
    for doc in docs:
        if not shingle_set(doc.text, shingle_size):
            continue
        sig = signature(doc, seed=seed, shingle_size=shingle_size)
        sigs[doc.id] = sig
        index.add(doc.id, sig)

    uf = _UnionFind()
    confirmed: dict[tuple[str, str], float] = {}
    for id_a, id_b in sorted(index.candidate_pairs()):
        if exact:
            score = exact_jaccard(by_id[id_a].text, by_id[id_b].text, shingle_size)
        else:
            score = estimate_jaccard(sigs[id_a], sigs[id_b])
        if score > threshold:
            confirmed[(id_a, id_b)] = score
            uf.union(id_a, id_b)

    members: dict[str, list[str]] = defaultdict(list)
    for doc_id in sigs:
        members[uf.find(doc_id)].append(doc_id)

    removed: set[str] = set()
    clusters: list[dict] = []
    for root in sorted(members):
        group = sorted(members[root])
        if len(group) < 2:
            continue
        removed.update(group[1:])
        clusters.append({
            "kept": group[0],
            "removed": group[1:],
            "estimates": [
                [a, b, round(s, 4)]
                for (a, b), s in sorted(confirmed.items())
                if a in group and b in group
            ],
        })
    return removed, clusters
