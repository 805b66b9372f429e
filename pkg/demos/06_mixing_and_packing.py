"""Balanced sampling, stream interleaving, and binary sequence packing.

Run:  python demos/06_mixing_and_packing.py
"""

import random
import tempfile
from pathlib import Path

from transmix.corpus import Document
from transmix.mixer import balanced_sample, interleave
from transmix.pack import pack_stream, unpack_inspect
from transmix.tokenizer import WhitespaceCounter

rng = random.Random(6)
counter = WhitespaceCounter()

corpora = {}
for lang in ("en", "fr", "de", "es"):
    corpora[lang] = [
        Document(id=f"{lang}{i:03d}", lang=lang,
                 text=" ".join(f"{lang}w{i}x{j}" for j in range(rng.randint(8, 40))))
        for i in range(150)
    ]

# Equal token budgets per language: whole documents are sampled without
# replacement until each budget is met (the last document may overshoot).
budget = 1200
samples = {}
for lang, docs in corpora.items():
    samples[lang] = balanced_sample(docs, budget, counter, seed=42)
    total = sum(counter.count(d.text) for d in samples[lang])
    print(f"{lang}: sampled {len(samples[lang]):3d} docs, {total} tokens "
          f"(budget {budget})")

# Interleave shuffles the union so no language runs in blocks.
mixed = list(interleave(list(samples.values()), seed=42))
head = "".join(d.lang[0] for d in mixed[:40])
print(f"\nmixed stream head (one letter per doc): {head}")

# Pack into fixed-length sequences with one EOS after every document.
workdir = Path(tempfile.mkdtemp(prefix="transmix-demo-"))
bin_path = workdir / "tokens.bin"
manifest = pack_stream(mixed, counter, bin_path, sequence_length=256)
print(f"\npacked {manifest.sequence_count} sequences of "
      f"{manifest.sequence_length} tokens -> {bin_path}")
print(f"  doc tokens {manifest.total_doc_tokens} + eos {manifest.eos_count} "
      f"= {manifest.sequence_count} x {manifest.sequence_length} "
      f"+ {manifest.dropped_remainder} dropped")
assert manifest.identity_holds()

first = unpack_inspect(bin_path, 1, expected_length=256)[0]
print(f"  first sequence: {len(first)} ids, eos id {counter.eos_id} appears "
      f"{first.count(counter.eos_id)} times")
