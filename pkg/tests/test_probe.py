"""Language ID, prior probing, and translation-pair detection tests."""

import itertools
import random

import pytest

from transmix.probe import (
    NgramLanguageModel,
    bundled_seed_paths,
    classify_language,
    detect_translation_pair,
    probe_prior,
    train_langid,
)
from transmix.translate import BackendResult

from conftest import seed_lines

LANGS = ("en", "fr", "de", "es")


def split_seeds():
    """Train on the first 228 lines, hold out the next 100, per language.

    The seed files are grouped three lines per source sentence, so cutting at
    a multiple of three keeps held-out sentences disjoint from training.
    """
    train, held = {}, {}
    for lang in LANGS:
        lines = seed_lines(lang)
        train[lang] = "\n".join(lines[:228])
        held[lang] = lines[228:328]
    return train, held


@pytest.fixture(scope="module")
def model():
    train, _ = split_seeds()
    return train_langid(train)


@pytest.fixture(scope="module")
def held_out():
    _, held = split_seeds()
    return held


class TestTrainLangid:
    def test_insufficient_seed_text_rejected(self):
        with pytest.raises(ValueError, match="at least"):
            train_langid({"en": "too short"})

    def test_bundled_seeds_exist_for_all_languages(self):
        assert set(bundled_seed_paths()) == set(LANGS)

    def test_single_language_model_predicts_it_or_other(self):
        single = train_langid({"fr": "\n".join(seed_lines("fr")[:250])})
        assert classify_language("Le train arrive en gare.", single).label == "fr"
        assert classify_language("12345 67890", single).label == "other"

    def test_round_trip_serialization(self, model, tmp_path):
        path = tmp_path / "langid.json"
        model.save(path)
        loaded = NgramLanguageModel.load(path)
        for text in ("The tide turned quickly.", "La marée monte vite.",
                     "Die Flut kommt schnell.", "La marea sube rápido."):
            assert classify_language(text, loaded).label == \
                classify_language(text, model).label


class TestClassifyLanguage:
    def test_held_out_accuracy(self, model, held_out):
        correct = total = 0
        for lang, sentences in held_out.items():
            for sent in sentences:
                total += 1
                correct += classify_language(sent, model).label == lang
        assert total == 400
        assert correct / total >= 0.95

    def test_german_example(self, model):
        score = classify_language(
            "Der Himmel ist blau und die Wiese ist grün.", model)
        assert score.label == "de"

    def test_digits_only_is_other(self, model):
        assert classify_language("12345 67890", model).label == "other"

    def test_empty_is_other(self, model):
        assert classify_language("", model).label == "other"

    def test_short_text_flagged_low_confidence(self, model):
        assert classify_language("Oui merci.", model).low_confidence
        assert not classify_language(
            "Merci beaucoup pour votre aide précieuse aujourd'hui.", model
        ).low_confidence

    def test_determinism(self, model):
        text = "El puerto estaba tranquilo por la mañana."
        a = classify_language(text, model)
        b = classify_language(text, model)
        assert a.scores == b.scores and a.label == b.label

    def test_training_line_order_does_not_move_predictions(self, held_out):
        train, _ = split_seeds()
        shuffled = {}
        rng = random.Random(17)
        for lang, text in train.items():
            lines = text.splitlines()
            rng.shuffle(lines)
            shuffled[lang] = "\n".join(lines)
        base = train_langid(train)
        permuted = train_langid(shuffled)
        diffs = 0
        total = 0
        for lang, sentences in held_out.items():
            for sent in sentences:
                total += 1
                if classify_language(sent, base).label != \
                        classify_language(sent, permuted).label:
                    diffs += 1
        assert diffs / total <= 0.01


class ReplayBackend:
    """Cycles deterministically through canned generations."""

    def __init__(self, texts, fail_every=0):
        self.texts = itertools.cycle(texts)
        self.calls = 0
        self.fail_every = fail_every

    def complete(self, prompt, max_tokens=0, temperature=1.0):
        self.calls += 1
        if self.fail_every and self.calls % self.fail_every == 0:
            return BackendResult(error="synthetic refusal")
        return BackendResult(text=next(self.texts))


class TestProbePrior:
    def test_fifty_fifty_mock(self, model):
        fr = " ".join(seed_lines("fr")[:3])
        es = " ".join(seed_lines("es")[:3])
        backend = ReplayBackend([fr, es])
        report, _ = probe_prior(backend, model, n=100, max_tokens=300,
                                temperature=1.0)
        assert report.percentages["fr"] == 50.0
        assert report.percentages["es"] == 50.0
        assert report.percentages["en"] == 0.0

    def test_percentages_sum_to_100(self, model):
        texts = [" ".join(seed_lines(lang)[i:i + 2])
                 for lang in LANGS for i in (0, 30, 60)]
        texts.append("9999 8888 7777")  # classifies as other
        backend = ReplayBackend(list(texts))
        report, _ = probe_prior(backend, model, n=512, max_tokens=300,
                                temperature=1.0)
        assert report.obtained == 512
        assert sum(report.percentages.values()) == pytest.approx(100.0, abs=0.1)
        assert report.check()

    def test_backend_failures_reduce_obtained(self, model):
        backend = ReplayBackend([" ".join(seed_lines("de")[:2])], fail_every=4)
        report, _ = probe_prior(backend, model, n=100, max_tokens=300,
                                temperature=1.0)
        assert report.requested == 100
        assert report.obtained == 75
        assert report.check()

    def test_report_records_protocol_params(self, model):
        backend = ReplayBackend([" ".join(seed_lines("en")[:2])])
        report, _ = probe_prior(backend, model, n=8, max_tokens=300,
                                temperature=1.0, seed=31)
        assert report.max_tokens == 300 and report.temperature == 1.0
        assert report.seed == 31

    def test_translation_pair_percentage_and_evidence(self, model):
        pair_text = ("English: The bridge reopens in May after repairs.\n"
                     "French: Le pont rouvre en mai après les travaux.")
        mono = " ".join(seed_lines("de")[:3])
        backend = ReplayBackend([pair_text, mono])
        report, evidence = probe_prior(backend, model, n=50, max_tokens=300,
                                       temperature=1.0)
        assert report.translation_pair_percent == 50.0
        assert evidence and evidence[0]["rule"] == "name_prefix"


class TestDetectTranslationPair:
    def test_name_prefix_format(self, model):
        text = ("English: The hotel lies close to the old harbour wall.\n"
                "Czech: Hotel stojí blízko staré přístavní zdi.")
        found, why = detect_translation_pair(text, model)
        assert found and why["rule"] == "name_prefix"
        assert why["names"] == ["Czech", "English"]

    def test_tab_separated_bilingual_line(self, model):
        text = ("The update requires a newer phone model.\t"
                "* La mise à jour nécessite un téléphone plus récent.")
        found, why = detect_translation_pair(text, model)
        assert found and why["rule"] == "tab_bilingual"
        assert set(why["labels"]) == {"en", "fr"}

    def test_alternating_blocks(self, model):
        en_para = " ".join(seed_lines("en")[:4])
        de_para = " ".join(seed_lines("de")[:4])
        text = f"{en_para}\n\n{de_para}\n\n{en_para}\n\n{de_para}"
        found, why = detect_translation_pair(text, model)
        assert found and why["rule"] == "alternating_blocks"
        assert set(why["labels"]) == {"en", "de"}

    def test_monolingual_paragraph_is_false(self, model):
        text = " ".join(seed_lines("fr")[:6])
        found, why = detect_translation_pair(text, model)
        assert not found and why is None

    def test_hundred_monolingual_fixtures_all_false(self, model):
        rng = random.Random(23)
        for _ in range(100):
            lang = rng.choice(LANGS)
            lines = seed_lines(lang)
            start = rng.randrange(len(lines) - 6)
            text = "\n".join(lines[start:start + rng.randint(2, 6)])
            found, _ = detect_translation_pair(text, model)
            assert not found, text

    def test_single_language_with_high_margin_never_a_pair(self, model):
        for lang in LANGS:
            text = " ".join(seed_lines(lang)[:5])
            score = classify_language(text, model)
            if score.margin >= 0.6:
                found, _ = detect_translation_pair(text, model)
                assert not found
