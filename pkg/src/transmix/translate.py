"""Chunked document translation against a completion backend.

Documents are segmented into token-budgeted chunks, each chunk is rendered
into an instruction-wrapped prompt, sent to a backend, and the raw output is
trimmed back to the last complete sentence before the chunks are rejoined in
order. Corpus runs are resumable through an append-only checkpoint journal;
failed documents land in a failure manifest instead of being silently lost.
"""

from __future__ import annotations

import json
import sys
import time
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Callable, Sequence

from .corpus import Document, read_corpus
from .segment import Chunk, chunk_document, split_sentences
from .tokenizer import TokenCounter

__all__ = [
    "LANGUAGE_NAMES",
    "PromptTemplate",
    "TemplateError",
    "BackendResult",
    "MockEchoBackend",
    "MockCipherBackend",
    "HttpCompletionBackend",
    "GenerationParams",
    "TranslationRecord",
    "JournalCorruptError",
    "build_prompt",
    "trim_incomplete",
    "translate_document",
    "translate_corpus",
    "cipher_map",
]

LANGUAGE_NAMES = {"en": "English", "fr": "French", "de": "German", "es": "Spanish"}

DEFAULT_INSTRUCTION = (
    "Translate the following text from English to {TARGET_LANGUAGE}. "
    "Reply with the {TARGET_LANGUAGE} translation only, without commentary:"
    "\n\n{SOURCE_TEXT}"
)


class TemplateError(ValueError):
    """Template missing a slot, or an unknown target language."""


@dataclass(frozen=True)
class PromptTemplate:
    """Instruction wrapper with {TARGET_LANGUAGE} and {SOURCE_TEXT} slots.

    The default wording is a workable starting point, not canonical; adjust
    it per serving setup through the config file. Per-target overrides
    replace the instruction text for a single language.
    """

    instruction: str = DEFAULT_INSTRUCTION
    wrapper_open: str = "[INST]"
    wrapper_close: str = "[/INST]"
    overrides: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for label, inst in [("default", self.instruction),
                            *((f"override:{k}", v) for k, v in self.overrides.items())]:
            if inst.count("{SOURCE_TEXT}") != 1:
                raise TemplateError(
                    f"{label} instruction must contain {{SOURCE_TEXT}} exactly once")
            if "{TARGET_LANGUAGE}" not in inst:
                raise TemplateError(
                    f"{label} instruction must contain {{TARGET_LANGUAGE}}")

    def _instruction_for(self, tgt: str) -> str:
        return self.overrides.get(tgt, self.instruction)

    def render(self, source_text: str, tgt: str) -> str:
        if tgt not in LANGUAGE_NAMES:
            raise TemplateError(f"no language name configured for target {tgt!r}")
        inst = self._instruction_for(tgt)
        body = inst.replace("{TARGET_LANGUAGE}", LANGUAGE_NAMES[tgt])
        body = body.replace("{SOURCE_TEXT}", source_text)
        return f"{self.wrapper_open} {body} {self.wrapper_close}"

    def extract_source(self, prompt: str) -> str | None:
        """Invert render(): recover the embedded source text, if possible."""
        for tgt in LANGUAGE_NAMES:
            inst = self._instruction_for(tgt)
            body = inst.replace("{TARGET_LANGUAGE}", LANGUAGE_NAMES[tgt])
            prefix, suffix = body.split("{SOURCE_TEXT}")
            full_prefix = f"{self.wrapper_open} {prefix}"
            full_suffix = f"{suffix} {self.wrapper_close}"
            if prompt.startswith(full_prefix) and prompt.endswith(full_suffix):
                return prompt[len(full_prefix):len(prompt) - len(full_suffix)]
        return None


def build_prompt(chunk: Chunk | str, src: str, tgt: str,
                 template: PromptTemplate | None = None) -> str:
    """Render a chunk into a complete prompt for the backend."""
    if src == tgt:
        raise TemplateError(f"source and target language are both {src!r}")
    template = template or PromptTemplate()
    text = chunk.text if isinstance(chunk, Chunk) else chunk
    return template.render(text, tgt)


@dataclass(frozen=True)
class BackendResult:
    text: str | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.text is not None


class MockEchoBackend:
    """Returns the prompt's embedded source text unchanged. For tests/dry runs."""

    kind = "mock-echo"

    def __init__(self, template: PromptTemplate | None = None) -> None:
        self.template = template or PromptTemplate()
        self.calls = 0

    def complete(self, prompt: str, max_tokens: int = 0,
                 temperature: float = 0.0) -> BackendResult:
        self.calls += 1
        source = self.template.extract_source(prompt)
        if source is None:
            return BackendResult(error="echo backend could not locate source text")
        return BackendResult(text=source)


def cipher_map(text: str) -> str:
    """Deterministic reversible letter mapping (self-inverse rot13)."""
    out = []
    for ch in text:
        if "a" <= ch <= "z":
            out.append(chr((ord(ch) - 97 + 13) % 26 + 97))
        elif "A" <= ch <= "Z":
            out.append(chr((ord(ch) - 65 + 13) % 26 + 65))
        else:
            out.append(ch)
    return "".join(out)


class MockCipherBackend:
    """Applies a reversible character cipher to the source text.

    Simulates a language change while keeping round-trip equality testable:
    cipher_map(output) recovers the input.
    """

    kind = "mock-cipher"

    def __init__(self, template: PromptTemplate | None = None) -> None:
        self.template = template or PromptTemplate()
        self.calls = 0

    def complete(self, prompt: str, max_tokens: int = 0,
                 temperature: float = 0.0) -> BackendResult:
        self.calls += 1
        source = self.template.extract_source(prompt)
        if source is None:
            return BackendResult(error="cipher backend could not locate source text")
        return BackendResult(text=cipher_map(source))


class HttpCompletionBackend:
    """OpenAI-compatible completions client over plain HTTP.

    Sends ``POST {endpoint}`` with JSON ``{model, prompt, max_tokens,
    temperature}``; the response field holding the generated text is
    addressed by a dotted path (list indices as integers), default
    ``choices.0.text``.
    """

    kind = "http-completion"

    def __init__(self, endpoint: str, model: str,
                 response_path: str = "choices.0.text",
                 timeout: float = 60.0) -> None:
        self.endpoint = endpoint
        self.model = model
        self.response_path = response_path
        self.timeout = timeout

    def complete(self, prompt: str, max_tokens: int = 256,
                 temperature: float = 0.0) -> BackendResult:
        payload = json.dumps({
            "model": self.model,
            "prompt": prompt,
            "max_tokens": max_tokens,
            "temperature": temperature,
        }).encode("utf-8")
        req = urllib.request.Request(
            self.endpoint, data=payload,
            headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                body = json.loads(resp.read().decode("utf-8"))
        except Exception as exc:  # noqa: BLE001 - network errors become typed failures
            return BackendResult(error=f"{type(exc).__name__}: {exc}")
        try:
            value = _walk_path(body, self.response_path)
        except (KeyError, IndexError, TypeError):
            return BackendResult(
                error=f"response has no field at path {self.response_path!r}")
        if not isinstance(value, str):
            return BackendResult(
                error=f"field at {self.response_path!r} is not a string")
        return BackendResult(text=value)


def _walk_path(obj, path: str):
    for part in path.split("."):
        obj = obj[int(part)] if part.isdigit() else obj[part]
    return obj


@dataclass(frozen=True)
class GenerationParams:
    max_tokens: int = 0  # 0 = twice the chunk token budget
    temperature: float = 0.0
    retries: int = 3
    backoff: float = 1.0
    max_in_flight: int = 32

    def resolve_max_tokens(self, chunk_limit: int) -> int:
        return self.max_tokens if self.max_tokens > 0 else 2 * chunk_limit


def complete_with_retries(
    backend,
    prompt: str,
    max_tokens: int,
    temperature: float,
    retries: int = 3,
    backoff: float = 1.0,
    sleep: Callable[[float], None] = time.sleep,
) -> BackendResult:
    """Call the backend up to ``retries`` times with exponential backoff."""
    result = BackendResult(error="no attempts made")
    delay = backoff
    for attempt in range(max(1, retries)):
        result = backend.complete(prompt, max_tokens=max_tokens,
                                  temperature=temperature)
        if result.ok:
            return result
        if attempt + 1 < retries:
            sleep(delay)
            delay *= 2
    return result


@dataclass
class TranslationRecord:
    """Per-chunk outcome, kept for the failure manifest and audits."""

    doc_id: str
    chunk_index: int
    status: str  # ok | failed | empty
    raw: str = ""
    trimmed: str = ""
    dropped_sentences: int = 0
    error: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False)


def trim_incomplete(raw: str, lang: str) -> tuple[str, int]:
    """Drop trailing sentences that never reached terminal punctuation.

    Returns the trimmed prefix (cut at a sentence boundary) and the number of
    sentences removed. Input with no complete sentence trims to "".
    """
    sentences = split_sentences(raw, lang)
    keep = len(sentences)
    while keep > 0 and not sentences[keep - 1].terminal:
        keep -= 1
    dropped = len(sentences) - keep
    if keep == 0:
        return "", dropped
    return raw[:sentences[keep - 1].end], dropped


def translate_document(
    doc: Document,
    tgt: str,
    backend,
    template: PromptTemplate | None = None,
    counter: TokenCounter | None = None,
    chunk_limit: int = 300,
    params: GenerationParams | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> tuple[Document | None, list[TranslationRecord]]:
    """Translate one document chunk by chunk and reassemble in chunk order.

    Chunks may complete concurrently but outputs are merged by index, so the
    result is deterministic. Returns (document, records); the document is
    None when any chunk failed after retries, and the records then carry the
    error. Chunks whose trimmed output is empty are skipped but recorded.
    """
    template = template or PromptTemplate()
    params = params or GenerationParams()
    if counter is None:
        from .tokenizer import WhitespaceCounter
        counter = WhitespaceCounter()
    chunks = chunk_document(doc, counter, chunk_limit)
    max_tokens = params.resolve_max_tokens(chunk_limit)

    def run_chunk(chunk: Chunk) -> BackendResult:
        prompt = build_prompt(chunk, doc.lang, tgt, template)
        return complete_with_retries(
            backend, prompt, max_tokens=max_tokens,
            temperature=params.temperature, retries=params.retries,
            backoff=params.backoff, sleep=sleep)

    if params.max_in_flight > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=params.max_in_flight) as pool:
            results = list(pool.map(run_chunk, chunks))  # map preserves order
    else:
        results = [run_chunk(c) for c in chunks]

    records: list[TranslationRecord] = []
    pieces: list[str] = []
    failed = False
    for chunk, result in zip(chunks, results):
        if not result.ok:
            records.append(TranslationRecord(
                doc_id=doc.id, chunk_index=chunk.index, status="failed",
                error=result.error))
            failed = True
            continue
        trimmed, dropped = trim_incomplete(result.text, tgt)
        if not trimmed:
            records.append(TranslationRecord(
                doc_id=doc.id, chunk_index=chunk.index, status="empty",
                raw=result.text, dropped_sentences=dropped))
            continue
        records.append(TranslationRecord(
            doc_id=doc.id, chunk_index=chunk.index, status="ok",
            raw=result.text, trimmed=trimmed, dropped_sentences=dropped))
        pieces.append(trimmed)

    if failed:
        return None, records
    out = Document(
        id=f"{doc.id}:{tgt}",
        lang=tgt,
        text="\n".join(pieces),
        source=doc.source,
    )
    return out, records


class JournalCorruptError(RuntimeError):
    """The checkpoint journal is unreadable; resume needs an explicit restart."""


def _load_journal(path: Path) -> list[dict]:
    """Parse the journal, tolerating only a torn final line (crash artifact)."""
    entries: list[dict] = []
    raw_lines = path.read_text(encoding="utf-8").splitlines()
    for i, line in enumerate(raw_lines):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict) or "doc_id" not in obj or "target" not in obj:
                raise ValueError("journal entry missing fields")
        except ValueError as exc:
            if i == len(raw_lines) - 1:
                break  # torn tail from an interrupted write
            raise JournalCorruptError(
                f"{path}:{i + 1}: corrupt journal line; rerun with restart") from exc
        entries.append(obj)
    return entries


def _truncate_to_journal(out_path: Path, done_ids: set[str]) -> None:
    """Keep only the output prefix covered by the journal; drop torn tails."""
    if not out_path.exists():
        return
    kept: list[str] = []
    for line in out_path.read_text(encoding="utf-8").splitlines():
        try:
            obj = json.loads(line)
            doc_id = obj["id"]
        except (ValueError, KeyError, TypeError):
            break
        if doc_id not in done_ids:
            break
        kept.append(line)
    out_path.write_text(
        "".join(l + "\n" for l in kept), encoding="utf-8")


@dataclass
class TranslateManifest:
    targets: list[str]
    docs_in: int = 0
    ok: int = 0
    failed: int = 0
    skipped_resume: int = 0
    chunk_calls: int = 0
    dropped_sentences: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def translate_corpus(
    in_path: str | Path,
    targets: Sequence[str],
    backend,
    out_dir: str | Path,
    template: PromptTemplate | None = None,
    counter: TokenCounter | None = None,
    chunk_limit: int = 300,
    params: GenerationParams | None = None,
    resume: bool = False,
    restart: bool = False,
    sleep: Callable[[float], None] = time.sleep,
) -> TranslateManifest:
    """Translate a corpus into one output corpus per target, resumably.

    Completed (doc, target) pairs are recorded in ``journal.jsonl`` and
    skipped on resume; interrupted runs continue to byte-identical output.
    Failed documents are excluded from the output corpora and recorded in
    ``failures.jsonl``; a pair journaled as failed is not retried on resume
    (wipe with restart to retry). An existing journal requires an explicit
    choice: resume to continue, restart to wipe.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    journal_path = out_dir / "journal.jsonl"
    failures_path = out_dir / "failures.jsonl"
    out_paths = {tgt: out_dir / f"{tgt}.jsonl" for tgt in targets}

    if restart:
        for p in [journal_path, failures_path, *out_paths.values()]:
            if p.exists():
                p.unlink()
    elif journal_path.exists() and not resume:
        raise RuntimeError(
            f"{journal_path} exists; pass resume=True to continue or "
            "restart=True to start over")

    done: set[tuple[str, str]] = set()
    resuming = resume and not restart and journal_path.exists()
    if resuming:
        entries = _load_journal(journal_path)
        done = {(e["doc_id"], e["target"]) for e in entries}
        # rebuild journal without the torn tail
        with open(journal_path, "w", encoding="utf-8") as fh:
            for e in entries:
                fh.write(json.dumps(e) + "\n")
        for tgt, p in out_paths.items():
            ok_ids = {e["doc_id"] + ":" + tgt for e in entries
                      if e["target"] == tgt and e["status"] == "ok"}
            _truncate_to_journal(p, ok_ids)
        _truncate_failures(failures_path, done)

    manifest = TranslateManifest(targets=list(targets))
    mode = "a" if resuming else "w"
    out_files = {tgt: open(p, mode, encoding="utf-8") for tgt, p in out_paths.items()}
    journal = open(journal_path, mode, encoding="utf-8")
    failures = open(failures_path, mode, encoding="utf-8")
    started = time.monotonic()
    try:
        for doc in read_corpus(in_path):
            manifest.docs_in += 1
            for tgt in targets:
                if (doc.id, tgt) in done:
                    manifest.skipped_resume += 1
                    continue
                translated, records = translate_document(
                    doc, tgt, backend, template=template, counter=counter,
                    chunk_limit=chunk_limit, params=params, sleep=sleep)
                manifest.chunk_calls += len(records)
                manifest.dropped_sentences += sum(r.dropped_sentences for r in records)
                status = "ok" if translated is not None else "failed"
                if translated is not None:
                    out_files[tgt].write(translated.to_json() + "\n")
                    out_files[tgt].flush()
                    manifest.ok += 1
                else:
                    manifest.failed += 1
                for record in records:
                    if record.status != "ok":
                        failures.write(json.dumps(
                            {"target": tgt, **json.loads(record.to_json())},
                            ensure_ascii=False) + "\n")
                failures.flush()
                journal.write(json.dumps(
                    {"doc_id": doc.id, "target": tgt, "status": status}) + "\n")
                journal.flush()
    finally:
        for fh in [*out_files.values(), journal, failures]:
            fh.close()
    elapsed = time.monotonic() - started
    rate = manifest.ok / elapsed if elapsed > 0 else float("inf")
    print(f"translate: {manifest.ok} ok, {manifest.failed} failed, "
          f"{manifest.skipped_resume} skipped ({rate:.1f} docs/s)",
          file=sys.stderr)
    return manifest


def _truncate_failures(path: Path, done: set[tuple[str, str]]) -> None:
    """Drop failure lines for pairs the journal never confirmed."""
    if not path.exists():
        return
    kept = []
    for line in path.read_text(encoding="utf-8").splitlines():
        try:
            obj = json.loads(line)
            pair = (obj["doc_id"], obj["target"])
        except (ValueError, KeyError, TypeError):
            break
        if pair not in done:
            break
        kept.append(line)
    path.write_text("".join(l + "\n" for l in kept), encoding="utf-8")
