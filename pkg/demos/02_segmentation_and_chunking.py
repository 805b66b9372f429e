"""Sentence segmentation and greedy chunking under a token budget.

Run:  python demos/02_segmentation_and_chunking.py
"""

from transmix.corpus import Document
from transmix.segment import chunk_document, split_sentences
from transmix.tokenizer import WhitespaceCounter

text = ("Dr. Meyer arrived at 5 p.m. with the survey results. The committee "
        "read them twice. Nobody spoke for a while.\n\n"
        "a closing note without punctuation")

print("input:")
print(f"  {text!r}\n")

sentences = split_sentences(text, "en")
print("sentences (terminal flag marks complete sentences):")
for s in sentences:
    flag = "terminal" if s.terminal else "OPEN"
    print(f"  [{s.start:3d}:{s.end:3d}] {flag:8s} {s.text!r}")

# Abbreviations ("Dr.", "p.m.") do not split; the blank line forces a break
# even though the line before it never reached terminal punctuation.
assert len(sentences) == 4
assert not sentences[-1].terminal

# Chunking groups consecutive sentences while the running token total stays
# within the budget; a single oversized sentence becomes its own chunk.
counter = WhitespaceCounter()
doc = Document(id="demo", lang="en", text=" ".join(
    f"Sentence number {i} has exactly seven words." for i in range(12)))

for limit in (7, 14, 28, 300):
    chunks = chunk_document(doc, counter, limit=limit)
    sizes = [len(c.sentences) for c in chunks]
    print(f"\nlimit {limit:3d}: {len(chunks):2d} chunks, sentences per chunk {sizes}")
    for c in chunks:
        assert len(c.sentences) == 1 or c.token_count <= limit

# The chunking is a lossless partition of the sentence list.
flat = [s for c in chunk_document(doc, counter, 14) for s in c.sentences]
assert flat == split_sentences(doc.text, "en")
print("\nlossless partition: ok")
