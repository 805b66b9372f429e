"""Shared fixtures: counters, corpus builders, synthetic document factories."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from transmix.corpus import Document, write_corpus
from transmix.tokenizer import BpeCounter, WhitespaceCounter, bundled_bpe_paths

SEED_DIR = Path(__file__).parent.parent / "src" / "transmix" / "data" / "seeds"


@pytest.fixture
def ws_counter():
    return WhitespaceCounter()


@pytest.fixture(scope="session")
def bpe_counter():
    vocab, merges = bundled_bpe_paths()
    return BpeCounter(vocab, merges)


@pytest.fixture
def make_corpus(tmp_path):
    """Write documents to a JSONL file and return its path."""

    def _make(docs, name="corpus.jsonl", fingerprint=None):
        path = tmp_path / name
        write_corpus(path, docs, tokenizer_fingerprint=fingerprint)
        return path

    return _make


def seed_lines(lang: str) -> list[str]:
    return (SEED_DIR / f"{lang}.txt").read_text(encoding="utf-8").splitlines()


def random_words(rng: random.Random, n: int, prefix: str = "w") -> list[str]:
    return [f"{prefix}{rng.randrange(10**9)}" for _ in range(n)]


def make_docs(rng: random.Random, count: int, lang: str = "en",
              min_words: int = 5, max_words: int = 60) -> list[Document]:
    docs = []
    for i in range(count):
        words = random_words(rng, rng.randint(min_words, max_words))
        docs.append(Document(id=f"doc{i:05d}", lang=lang, text=" ".join(words)))
    return docs
