"""CLI subcommand and pipeline orchestration tests."""

import json
import random

import pytest

from transmix.cli import main
from transmix.corpus import Document, read_corpus, write_corpus
from transmix.pack import PackManifest, unpack_inspect

from conftest import seed_lines


def pipeline_docs(count, rng=None):
    """Documents long and clean enough to pass the quality rules."""
    rng = rng or random.Random(55)
    pool = seed_lines("en")
    docs = []
    for i in range(count):
        lines = [pool[rng.randrange(len(pool))] for _ in range(8)]
        docs.append(Document(id=f"doc{i:05d}", lang="en", text=" ".join(lines)))
    return docs


@pytest.fixture
def small_corpus(tmp_path):
    path = tmp_path / "in.jsonl"
    write_corpus(path, pipeline_docs(30))
    return path


def read_manifest(stage_dir):
    return json.loads((stage_dir / "manifest.json").read_text(encoding="utf-8"))


class TestStats:
    def test_matches_hand_computation(self, tmp_path, capsys):
        docs = [
            Document(id="a", lang="en", text="one two three"),
            Document(id="b", lang="en", text="four five"),
            Document(id="c", lang="fr", text="un deux trois quatre"),
        ]
        path = tmp_path / "in.jsonl"
        write_corpus(path, docs)
        assert main(["stats", str(path)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["en"] == {"tokens": 5, "docs": 2, "avg_doc_length": 2.5}
        assert report["fr"] == {"tokens": 4, "docs": 1, "avg_doc_length": 4.0}
        assert report["total"]["tokens"] == 9

    def test_out_file(self, tmp_path, small_corpus):
        out = tmp_path / "stats.json"
        assert main(["stats", str(small_corpus), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["total"]["docs"] == 30

    def test_cached_counts_trusted_only_with_matching_fingerprint(
            self, tmp_path, capsys):
        docs = [Document(id="a", lang="en", text="one two", token_count=99)]
        matching = tmp_path / "match.jsonl"
        write_corpus(matching, docs, tokenizer_fingerprint="ws:1")
        stale = tmp_path / "stale.jsonl"
        write_corpus(stale, docs, tokenizer_fingerprint="bpe:0123")
        assert main(["stats", str(matching)]) == 0
        assert json.loads(capsys.readouterr().out)["en"]["tokens"] == 99
        assert main(["stats", str(stale)]) == 0
        assert json.loads(capsys.readouterr().out)["en"]["tokens"] == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2


def test_config_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[translate]\nbackend = warp\n", encoding="utf-8")
    assert main(["stats", "x.jsonl", "--config", str(bad)]) == 2
    assert "translate.backend" in capsys.readouterr().err


def test_missing_input_is_stage_failure(tmp_path):
    assert main(["filter", str(tmp_path / "ghost.jsonl"),
                 "--out-dir", str(tmp_path / "out")]) == 1
    assert (tmp_path / "out" / "FAILED").exists()


def test_segment_subcommand(tmp_path, small_corpus):
    out = tmp_path / "chunks.jsonl"
    assert main(["segment", str(small_corpus), "--out", str(out)]) == 0
    records = [json.loads(l) for l in out.read_text().splitlines()]
    assert all(r["token_count"] > 0 for r in records)
    assert {r["doc_id"] for r in records} == {f"doc{i:05d}" for i in range(30)}


def test_filter_subcommand_partitions(tmp_path):
    docs = pipeline_docs(10) + [
        Document(id="tiny", lang="en", text="way too short")]
    path = tmp_path / "in.jsonl"
    write_corpus(path, docs)
    out = tmp_path / "filtered"
    assert main(["filter", str(path), "--out-dir", str(out)]) == 0
    manifest = read_manifest(out)
    assert manifest["in"] == 11
    assert manifest["kept"] == 10 and manifest["rejected"] == 1
    rejected = [json.loads(l) for l in (out / "rejected.jsonl").read_text().splitlines()]
    assert rejected[0]["doc"]["id"] == "tiny"
    assert rejected[0]["report"]["first_failed"] == "word_count"
    assert (out / "resolved_config.json").exists()


def test_dedup_subcommand_removes_copies(tmp_path):
    docs = pipeline_docs(10)
    docs.append(Document(id="zzcopy", lang="en", text=docs[0].text))
    path = tmp_path / "in.jsonl"
    write_corpus(path, docs)
    out = tmp_path / "deduped"
    assert main(["dedup", str(path), "--out-dir", str(out)]) == 0
    manifest = read_manifest(out)
    assert manifest["in"] == 11 and manifest["kept"] == 10
    clusters = (out / "clusters.jsonl").read_text().splitlines()
    assert json.loads(clusters[1])["removed"] == ["zzcopy"]


def test_dedup_exact_flag_recorded_in_manifests(tmp_path):
    path = tmp_path / "in.jsonl"
    write_corpus(path, pipeline_docs(6))
    out = tmp_path / "audited"
    assert main(["dedup", str(path), "--out-dir", str(out), "--exact"]) == 0
    assert read_manifest(out)["verification"] == "exact"
    header = json.loads((out / "clusters.jsonl").read_text().splitlines()[0])
    assert header["verification"] == "exact"


def test_strict_flag_aborts_on_malformed_line(tmp_path, capsys):
    path = tmp_path / "in.jsonl"
    good = pipeline_docs(3)
    path.write_text(
        "\n".join(d.to_json() for d in good) + "\nnot json at all\n",
        encoding="utf-8")
    assert main(["stats", str(path), "--strict"]) == 1
    capsys.readouterr()
    # lenient default skips the bad line and keeps going
    assert main(["stats", str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["total"]["docs"] == 3


def test_translate_subcommand_mock_echo(tmp_path, small_corpus):
    out = tmp_path / "translated"
    assert main(["translate", str(small_corpus), "--out-dir", str(out)]) == 0
    for tgt in ("fr", "de", "es"):
        assert len(list(read_corpus(out / f"{tgt}.jsonl"))) == 30
    assert read_manifest(out)["ok"] == 90


def test_mix_subcommand_uses_configured_sources(tmp_path):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    write_corpus(a, pipeline_docs(20, random.Random(1)))
    write_corpus(b, pipeline_docs(20, random.Random(2)))
    ini = tmp_path / "mix.ini"
    ini.write_text(f"[mix]\nsources = a:{a}, b:{b}\nbudget_per_source = 500\n",
                   encoding="utf-8")
    out = tmp_path / "mixed"
    assert main(["mix", "--config", str(ini), "--out-dir", str(out)]) == 0
    manifest = read_manifest(out)
    assert set(manifest["sources"]) == {"a", "b"}
    assert all(v["tokens"] >= 500 for v in manifest["sources"].values())
    assert (out / "mixed.jsonl").exists()


def test_pack_subcommand(tmp_path, small_corpus):
    out = tmp_path / "packed"
    assert main(["pack", str(small_corpus), "--out-dir", str(out)]) == 0
    manifest = PackManifest(**read_manifest(out))
    assert manifest.identity_holds()
    assert unpack_inspect(out / "tokens.bin", 1,
                          expected_length=manifest.sequence_length)


def test_probe_subcommand_with_echo_backend_records_zero_obtained(tmp_path):
    # the echo backend cannot serve empty prompts: every call fails, and the
    # report must say so rather than fabricate samples
    ini = tmp_path / "probe.ini"
    ini.write_text("[probe]\nn = 8\n", encoding="utf-8")
    out = tmp_path / "probe"
    assert main(["probe", "--config", str(ini), "--out-dir", str(out)]) == 0
    report = json.loads((out / "prior_report.json").read_text())
    assert report["requested"] == 8 and report["obtained"] == 0


class TestPipeline:
    def run_pipeline(self, tmp_path, name, seed="7", extra=()):
        in_path = tmp_path / "in.jsonl"
        if not in_path.exists():
            write_corpus(in_path, pipeline_docs(40))
        out = tmp_path / name
        code = main(["pipeline", str(in_path), "--out-dir", str(out),
                     "--seed", seed, *extra])
        return code, out

    def test_all_stage_artifacts_present(self, tmp_path):
        code, out = self.run_pipeline(tmp_path, "run1")
        assert code == 0
        for stage in ("01_filter", "02_dedup", "03_translate", "04_mix", "05_pack"):
            assert (out / stage / "manifest.json").exists(), stage
            assert (out / stage / "resolved_config.json").exists(), stage
        pack = PackManifest(**read_manifest(out / "05_pack"))
        assert pack.identity_holds()
        assert not (out / "FAILED").exists()

    def test_no_silent_data_loss(self, tmp_path):
        code, out = self.run_pipeline(tmp_path, "run1")
        assert code == 0
        filt = read_manifest(out / "01_filter")
        assert filt["in"] == filt["kept"] + filt["rejected"]
        dd = read_manifest(out / "02_dedup")
        assert dd["in"] == filt["kept"]
        assert dd["in"] == dd["kept"] + dd["removed"]
        tr = read_manifest(out / "03_translate")
        assert tr["docs_in"] == dd["kept"]
        assert tr["ok"] + tr["failed"] == tr["docs_in"] * 3  # three targets

    def test_reproducible_byte_identical(self, tmp_path):
        _, out_a = self.run_pipeline(tmp_path, "runA")
        _, out_b = self.run_pipeline(tmp_path, "runB")
        assert (out_a / "05_pack" / "tokens.bin").read_bytes() == \
            (out_b / "05_pack" / "tokens.bin").read_bytes()
        assert read_manifest(out_a / "05_pack") == read_manifest(out_b / "05_pack")
        assert read_manifest(out_a / "04_mix") == read_manifest(out_b / "04_mix")

    def test_seed_changes_pack_output(self, tmp_path):
        _, out_a = self.run_pipeline(tmp_path, "runA", seed="7")
        _, out_b = self.run_pipeline(tmp_path, "runB", seed="8")
        assert (out_a / "05_pack" / "tokens.bin").read_bytes() != \
            (out_b / "05_pack" / "tokens.bin").read_bytes()
