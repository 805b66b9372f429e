"""MinHash signatures, Jaccard estimates, and LSH clustering.

Run:  python demos/05_near_deduplication.py
"""

import random

from transmix.corpus import Document
from transmix.dedup import (
    dedup_corpus,
    estimate_jaccard,
    exact_jaccard,
    signature,
)

rng = random.Random(5)


def near_duplicate_pair(shared: int, unique: int, uid: int):
    """Two documents sharing a word core; exact Jaccard is known by design."""
    core = [f"core{uid}w{i}" for i in range(shared)]
    a = core + [f"a{uid}w{i}" for i in range(unique)]
    b = core + [f"b{uid}w{i}" for i in range(unique)]
    return " ".join(a), " ".join(b)


print("estimate vs exact Jaccard (128 hashes):")
for shared, unique in [(200, 5), (170, 15), (120, 40), (50, 80)]:
    a, b = near_duplicate_pair(shared, unique, rng.randrange(10**6))
    est = estimate_jaccard(signature(a, seed=0), signature(b, seed=0))
    exact = exact_jaccard(a, b)
    print(f"  exact {exact:.3f}   estimate {est:.3f}   |error| {abs(est-exact):.3f}")

# Case and punctuation do not matter: shingles are built from normalized text.
s1 = signature("The Quick, Brown Fox! Jumps over the lazy dog today.", seed=1)
s2 = signature("the quick brown fox jumps over the lazy dog today", seed=1)
assert s1 == s2
print("\nnormalization: case/punctuation variants share a signature")

# Build a corpus with planted duplicates and run the full clustering.
docs = []
planted = []
for i in range(20):
    a, b = near_duplicate_pair(190, 6, i)
    docs.append(Document(id=f"p{i:02d}a", lang="en", text=a))
    docs.append(Document(id=f"p{i:02d}b", lang="en", text=b))
    planted.append((f"p{i:02d}a", f"p{i:02d}b"))
for i in range(60):
    words = [f"u{i}w{j}" for j in range(80)]
    docs.append(Document(id=f"uniq{i:02d}", lang="en", text=" ".join(words)))
rng.shuffle(docs)

result = dedup_corpus(docs, threshold=0.8, seed=0)
print(f"\ncorpus of {len(docs)} docs -> kept {len(result.kept_ids)}, "
      f"removed {len(result.removed_ids)} in {len(result.clusters)} clusters")
print("first cluster:", result.clusters[0])

found = sum(1 for a, b in planted if b in result.removed_ids or a in result.removed_ids)
print(f"planted pairs collapsed: {found}/{len(planted)}")

# --exact style audit: verification by exact shingle Jaccard instead of the
# signature estimate (slower, used to double-check borderline clusters).
audit = dedup_corpus(docs, threshold=0.8, seed=0, exact=True)
print(f"audit mode clusters: {len(audit.clusters)} "
      f"(params recorded: {audit.params['verification']})")
