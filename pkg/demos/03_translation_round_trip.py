"""Chunked translation against mock backends, with trimming and resume.

The echo backend returns the source text (a dry-run harness); the cipher
backend applies a reversible letter mapping so a "language change" can be
verified without any model. Swap in HttpCompletionBackend against a real
serving endpoint for production runs.

Run:  python demos/03_translation_round_trip.py
"""

import tempfile
from pathlib import Path

from transmix.corpus import Document, read_corpus, write_corpus
from transmix.tokenizer import WhitespaceCounter
from transmix.translate import (
    GenerationParams,
    MockCipherBackend,
    MockEchoBackend,
    PromptTemplate,
    cipher_map,
    translate_corpus,
    translate_document,
    trim_incomplete,
)

template = PromptTemplate()
print("rendered prompt for a one-sentence chunk (en -> fr):")
print(" ", template.render("The tide is rising.", "fr"), "\n")

# Incomplete trailing sentences are dropped before reassembly.
raw = "La mer est bleue. Le ciel est"
trimmed, dropped = trim_incomplete(raw, "fr")
print(f"raw output:     {raw!r}")
print(f"kept:           {trimmed!r}  (dropped {dropped} incomplete sentence)\n")

counter = WhitespaceCounter()
fast = GenerationParams(retries=2, backoff=0.0)
doc = Document(id="story", lang="en", text=(
    "The lighthouse keeper kept a diary. Every storm filled half a page. "
    "Calm weeks were a single line."))

out, records = translate_document(doc, "fr", MockEchoBackend(template),
                                  counter=counter, chunk_limit=8,
                                  params=fast, sleep=lambda s: None)
print(f"echo translation of {doc.id!r}: {len(records)} chunks -> {out.id}")
assert out.text.split() == doc.text.split()

out, _ = translate_document(doc, "de", MockCipherBackend(template),
                            counter=counter, params=fast, sleep=lambda s: None)
print(f"cipher output:  {out.text[:46]!r}...")
assert cipher_map(out.text).split() == doc.text.split()
print("cipher round trip: ok\n")

# Corpus-level runs journal every completed (document, target) pair and can
# resume after an interruption without changing the final bytes.
workdir = Path(tempfile.mkdtemp(prefix="transmix-demo-"))
in_path = workdir / "in.jsonl"
write_corpus(in_path, [
    Document(id=f"d{i}", lang="en", text=f"Short fact number {i}. It is true.")
    for i in range(5)
])
manifest = translate_corpus(in_path, ["fr", "es"], MockEchoBackend(template),
                            workdir / "out", counter=counter, params=fast,
                            sleep=lambda s: None)
print(f"corpus run: {manifest.ok} ok / {manifest.failed} failed")
for tgt in ("fr", "es"):
    n = sum(1 for _ in read_corpus(workdir / "out" / f"{tgt}.jsonl"))
    print(f"  {tgt}: {n} documents, journal at {workdir / 'out' / 'journal.jsonl'}")
