"""Configuration loading, env overrides, and validation diagnostics."""

import pytest

from transmix.config import ConfigError, PipelineConfig, load_config
from transmix.tokenizer import bundled_bpe_paths
from transmix.translate import MockCipherBackend, MockEchoBackend


def test_defaults_without_a_file():
    config = load_config(None)
    assert config.seed == 0
    assert config.targets == ["fr", "de", "es"]
    assert config.dedup_threshold == 0.8
    assert config.sequence_length == 2048
    assert config.probe_n == 512 and config.probe_max_tokens == 300
    assert config.probe_temperature == 1.0


def test_missing_file_is_config_error():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/pipeline.ini")


def test_ini_values_parsed(tmp_path):
    path = tmp_path / "pipeline.ini"
    path.write_text(
        "[run]\nseed = 99\n"
        "[segment]\nchunk_limit = 120\n"
        "[translate]\ntargets = fr\nbackend = mock-cipher\n"
        "[dedup]\nthreshold = 0.85\n"
        "[pack]\nsequence_length = 256\n",
        encoding="utf-8")
    config = load_config(path)
    assert config.seed == 99
    assert config.chunk_limit == 120
    assert config.targets == ["fr"]
    assert isinstance(config.make_backend(), MockCipherBackend)
    assert config.dedup_threshold == 0.85
    assert config.sequence_length == 256


def test_env_overrides_beat_file_values(tmp_path, monkeypatch):
    path = tmp_path / "pipeline.ini"
    path.write_text("[dedup]\nthreshold = 0.8\n", encoding="utf-8")
    monkeypatch.setenv("TWP_DEDUP_THRESHOLD", "0.9")
    monkeypatch.setenv("TWP_RUN_SEED", "123")
    config = load_config(path)
    assert config.dedup_threshold == 0.9
    assert config.seed == 123


def test_validation_collects_field_level_problems(tmp_path):
    path = tmp_path / "pipeline.ini"
    path.write_text(
        "[translate]\nbackend = teleport\n"
        "[dedup]\nbands = 4\nrows = 4\n"
        "[pack]\nsequence_length = 1\n",
        encoding="utf-8")
    with pytest.raises(ConfigError) as err:
        load_config(path)
    message = str(err.value)
    assert "translate.backend" in message
    assert "dedup.bands" in message
    assert "pack.sequence_length" in message


def test_bad_numeric_value_reported_with_field_name(tmp_path):
    path = tmp_path / "pipeline.ini"
    path.write_text("[run]\nseed = not-a-number\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="run.seed"):
        load_config(path)


def test_bpe_tokenizer_requires_existing_files(tmp_path):
    path = tmp_path / "pipeline.ini"
    path.write_text("[corpus]\ntokenizer = bpe\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="bpe_vocab"):
        load_config(path)

    vocab, merges = bundled_bpe_paths()
    path.write_text(
        f"[corpus]\ntokenizer = bpe\nbpe_vocab = {vocab}\nbpe_merges = {merges}\n",
        encoding="utf-8")
    config = load_config(path)
    assert config.make_counter().mode == "bpe"


def test_instruction_override_validated(tmp_path):
    path = tmp_path / "pipeline.ini"
    path.write_text(
        "[translate]\ninstruction = no slots at all\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="translate.instruction"):
        load_config(path)


def test_snapshot_is_json_ready(tmp_path):
    config = load_config(None)
    out = tmp_path / "snap.json"
    config.write_snapshot(out)
    import json
    snap = json.loads(out.read_text(encoding="utf-8"))
    assert snap["seed"] == 0
    assert snap["quality"]["min_words"] == 50


def test_mix_sources_parsing(tmp_path):
    path = tmp_path / "pipeline.ini"
    path.write_text(
        "[mix]\nsources = en:data/en.jsonl, fr:data/fr.jsonl\n", encoding="utf-8")
    config = load_config(path)
    assert config.mix_sources == [("en", "data/en.jsonl"), ("fr", "data/fr.jsonl")]


def test_default_backend_is_echo():
    assert isinstance(PipelineConfig().make_backend(), MockEchoBackend)
