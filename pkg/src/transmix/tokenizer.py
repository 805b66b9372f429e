"""Token counters: a whitespace fallback and a small merges-based BPE.

Every counter is deterministic, exposes a reserved EOS id for document
separation, and carries a fingerprint so downstream artifacts can record
which tokenizer produced their counts.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from pathlib import Path

__all__ = [
    "TokenCounter",
    "WhitespaceCounter",
    "BpeCounter",
    "learn_bpe",
    "bundled_bpe_paths",
]

_WORD_END = "</w>"
_UNK = "<unk>"
_EOS = "<eos>"


class TokenCounter:
    """Interface shared by all counters."""

    mode: str
    eos_id: int
    fingerprint: str

    def count(self, text: str) -> int:
        raise NotImplementedError

    def encode(self, text: str) -> list[int]:
        raise NotImplementedError


class WhitespaceCounter(TokenCounter):
    """Counts maximal non-whitespace runs.

    Token ids are stable 32-bit hashes of the word; id 0 is reserved for EOS.
    Good enough for packing and budget arithmetic when no BPE files are at
    hand, not reversible.
    """

    mode = "whitespace"

    def __init__(self) -> None:
        self.eos_id = 0
        self.fingerprint = "ws:1"

    def count(self, text: str) -> int:
        return len(text.split())

    def encode(self, text: str) -> list[int]:
        return [_word_id(w) for w in text.split()]


def _word_id(word: str) -> int:
    digest = hashlib.blake2b(word.encode("utf-8"), digest_size=4).digest()
    # keep 0 free for the EOS separator
    return 1 + int.from_bytes(digest, "little") % (2**32 - 1)


class BpeCounter(TokenCounter):
    """Word-internal BPE driven by plain-text vocab and merges files.

    The vocab file holds one symbol per line (line number = token id) and
    must contain ``<unk>`` and ``<eos>``. The merges file holds one
    ``left right`` pair per line in rank order. Words are whitespace-split,
    spelled as characters plus a ``</w>`` end marker, then merged greedily
    by rank; symbols missing from the vocab map to ``<unk>``.
    """

    mode = "bpe"

    def __init__(self, vocab_path: str | Path, merges_path: str | Path) -> None:
        vocab_path = Path(vocab_path)
        merges_path = Path(merges_path)
        vocab_bytes = vocab_path.read_bytes()
        merges_bytes = merges_path.read_bytes()

        self.token_to_id: dict[str, int] = {}
        for i, line in enumerate(vocab_bytes.decode("utf-8").splitlines()):
            if line:
                self.token_to_id[line] = i
        if _UNK not in self.token_to_id or _EOS not in self.token_to_id:
            raise ValueError(f"vocab must define {_UNK} and {_EOS}: {vocab_path}")

        self.merge_ranks: dict[tuple[str, str], int] = {}
        for rank, line in enumerate(merges_bytes.decode("utf-8").splitlines()):
            if not line:
                continue
            left, right = line.split(" ")
            self.merge_ranks[(left, right)] = rank

        self.unk_id = self.token_to_id[_UNK]
        self.eos_id = self.token_to_id[_EOS]
        h = hashlib.blake2b(vocab_bytes + b"\x00" + merges_bytes, digest_size=8)
        self.fingerprint = "bpe:" + h.hexdigest()
        self._word_cache: dict[str, list[int]] = {}

    def count(self, text: str) -> int:
        return len(self.encode(text))

    def encode(self, text: str) -> list[int]:
        ids: list[int] = []
        for word in text.split():
            cached = self._word_cache.get(word)
            if cached is None:
                cached = [
                    self.token_to_id.get(sym, self.unk_id)
                    for sym in self._bpe_word(word)
                ]
                if len(self._word_cache) < 100_000:
                    self._word_cache[word] = cached
            ids.extend(cached)
        return ids

    def _bpe_word(self, word: str) -> list[str]:
        symbols = list(word) + [_WORD_END]
        while len(symbols) > 1:
            pairs = {(symbols[i], symbols[i + 1]) for i in range(len(symbols) - 1)}
            best = min(pairs, key=lambda p: self.merge_ranks.get(p, 1 << 60))
            if best not in self.merge_ranks:
                break
            symbols = _apply_merge(symbols, best)
        return symbols


def _apply_merge(symbols: list[str], pair: tuple[str, str]) -> list[str]:
    merged: list[str] = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == pair:
            merged.append(symbols[i] + symbols[i + 1])
            i += 2
        else:
            merged.append(symbols[i])
            i += 1
    return merged


def learn_bpe(texts: list[str], num_merges: int = 400) -> tuple[list[str], list[tuple[str, str]]]:
    """Learn a merge table from raw text; returns (vocab lines, merges).

    Tie-breaks on the pair itself so the result is independent of input
    order. Mainly used to regenerate the bundled vocab/merges files.
    """
    word_freq: Counter[tuple[str, ...]] = Counter()
    for text in texts:
        for word in text.split():
            word_freq[tuple(word) + (_WORD_END,)] += 1

    merges: list[tuple[str, str]] = []
    for _ in range(num_merges):
        pair_freq: Counter[tuple[str, str]] = Counter()
        for symbols, freq in word_freq.items():
            for i in range(len(symbols) - 1):
                pair_freq[(symbols[i], symbols[i + 1])] += freq
        if not pair_freq:
            break
        best = max(pair_freq.items(), key=lambda kv: (kv[1], kv[0]))[0]
        if pair_freq[best] < 2:
            break
        merges.append(best)
        next_freq: Counter[tuple[str, ...]] = Counter()
        for symbols, freq in word_freq.items():
            next_freq[tuple(_apply_merge(list(symbols), best))] += freq
        word_freq = next_freq

    symbols = {sym for word in word_freq for sym in word}
    for left, right in merges:
        symbols.add(left + right)
    vocab = [_UNK, _EOS] + sorted(symbols)
    return vocab, merges


def write_bpe_files(vocab: list[str], merges: list[tuple[str, str]],
                    vocab_path: str | Path, merges_path: str | Path) -> None:
    Path(vocab_path).write_text("\n".join(vocab) + "\n", encoding="utf-8")
    Path(merges_path).write_text(
        "\n".join(f"{a} {b}" for a, b in merges) + "\n", encoding="utf-8")


def bundled_bpe_paths() -> tuple[Path, Path]:
    """Paths of the small BPE shipped with the package."""
    base = Path(__file__).parent / "data" / "bpe"
    return base / "vocab.txt", base / "merges.txt"
