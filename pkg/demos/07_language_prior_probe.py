"""Language identification and probing a generator's language prior.

A character n-gram classifier is trained from the bundled seed corpora, then
a mock generation backend stands in for a served model: the probe samples
generations, labels each one, and reports the language distribution plus the
share of degenerate bilingual "translation pair" outputs.

Run:  python demos/07_language_prior_probe.py
"""

import itertools

from transmix.probe import (
    bundled_seed_paths,
    classify_language,
    detect_translation_pair,
    probe_prior,
    train_langid,
)
from transmix.translate import BackendResult

model = train_langid()
print("trained on bundled seeds:", ", ".join(sorted(bundled_seed_paths())))

for text in (
    "The lighthouse keeper kept a diary for forty years.",
    "Le gardien du phare a tenu un journal pendant quarante ans.",
    "Der Leuchtturmwärter führte vierzig Jahre lang ein Tagebuch.",
    "El farero llevó un diario durante cuarenta años.",
    "12345 67890",
):
    score = classify_language(text, model)
    print(f"  {score.label:6s} margin {score.margin:5.2f}  {text[:50]!r}")


class CannedGenerator:
    """Pretends to be a served model with a skewed language prior."""

    def __init__(self, texts):
        self.texts = itertools.cycle(texts)

    def complete(self, prompt, max_tokens=300, temperature=1.0):
        return BackendResult(text=next(self.texts))


seeds = {lang: path.read_text(encoding="utf-8").splitlines()
         for lang, path in bundled_seed_paths().items()}
generations = (
    [" ".join(seeds["en"][i:i + 3]) for i in range(0, 12, 3)]      # 4 english
    + [" ".join(seeds["fr"][i:i + 3]) for i in range(0, 9, 3)]     # 3 french
    + [" ".join(seeds["es"][0:3])]                                 # 1 spanish
    + ["English: The line is busy.\nFrench: La ligne est occupée."]  # 1 pair
)

report, evidence = probe_prior(CannedGenerator(generations), model,
                               n=512, max_tokens=300, temperature=1.0)
print(f"\nprior over {report.obtained} sampled generations:")
for lang, pct in report.percentages.items():
    print(f"  {lang:6s} {pct:5.1f}%")
print(f"  translation pairs: {report.translation_pair_percent:.1f}% "
      f"({len(evidence)} evidence records, first rule: {evidence[0]['rule']})")

# The detector recognizes the two common degenerate formats directly:
pair_a = "English: The road is closed.\nGerman: Die Straße ist gesperrt."
pair_b = "A web page about electromechanics.\tUne page web sur l'électromécanique."
for text in (pair_a, pair_b):
    found, why = detect_translation_pair(text, model)
    print(f"  pair={found} via {why['rule']}: {text[:40]!r}...")
