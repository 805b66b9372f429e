"""Heuristic quality filtering with full per-rule reports.

Run:  python demos/04_quality_filtering.py
"""

from transmix.corpus import Document
from transmix.quality import RuleConfig, filter_corpus, gopher_filter

clean = Document(id="clean", lang="en", text=(
    "The harbour master kept careful records of every arrival and departure. "
    "Fishing boats came in before dawn, and the ferry followed at eight. "
    "When the fog rolled in from the east, traffic stopped and the logbook "
    "stayed open on the desk until the horns fell silent. Those pages now "
    "sit in the town archive, where students read them for their essays on "
    "coastal trade and the slow decline of the old fleet."))

spam = Document(id="spam", lang="en", text="# " * 80)
listy = Document(id="listy", lang="en",
                 text="\n".join(f"* bullet point {i} in a long menu" for i in range(40)))

for doc in (clean, spam, listy):
    report = gopher_filter(doc)
    verdict = "keep" if report.keep else f"reject (first: {report.first_failed})"
    print(f"{doc.id:6s} -> {verdict}")
    for r in report.results:
        mark = "ok " if r.passed else "BAD"
        print(f"    {mark} {r.rule:28s} {r.value:.3f}")
    print()

# Every rule is measured even after the first failure, so thresholds can be
# audited from the report alone. Repetition rules exist but are opt-in:
repeated = Document(id="rep", lang="en",
                    text="\n".join(["the same line appears over and over"] * 60))
default = gopher_filter(repeated)
strict = gopher_filter(repeated, RuleConfig(check_repetition=True))
print("repetition rules off:", {r.rule for r in default.results} ==
      {r.rule for r in strict.results} and "same" or "extra rules added")
print("strict verdict:", "keep" if strict.keep else f"reject ({strict.first_failed})")

kept, rejected = [], []
for doc, report in filter_corpus([clean, spam, listy]):
    (kept if report.keep else rejected).append(doc.id)
print(f"\npartition: kept={kept} rejected={rejected}")
