"""transmix: turn a monolingual document corpus into a balanced multilingual
pretraining dataset.

corpus:     document model, JSONL streaming, token counting, statistics
segment:    sentence segmentation and token-budget chunking
translate:  prompt templates, completion backends, trimming, resumable runs
quality:    heuristic document quality filtering
dedup:      MinHash/LSH near-duplicate removal
mixer:      balanced sampling and stage mixture composition
pack:       EOS-separated fixed-length sequence packing
probe:      language identification and generation-prior probing
cli:        subcommand front-end and pipeline orchestration
"""

from .corpus import Document, compute_stats, read_corpus, write_corpus
from .segment import Chunk, Sentence, chunk_document, split_sentences
from .tokenizer import BpeCounter, TokenCounter, WhitespaceCounter

__version__ = "0.1.0"

__all__ = [
    "Document",
    "read_corpus",
    "write_corpus",
    "compute_stats",
    "Sentence",
    "Chunk",
    "split_sentences",
    "chunk_document",
    "TokenCounter",
    "WhitespaceCounter",
    "BpeCounter",
    "__version__",
]
