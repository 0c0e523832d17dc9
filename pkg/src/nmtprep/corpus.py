"""Core data types, corpus ingestion, manifests and test-set loading.

Corpora are plain UTF-8 text, one sentence per line, aligned by line number.
A manifest lists parallel file pairs with their language and domain; all
later stages consume manifests rather than bare file paths.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator

from .errors import DataError

SOURCE_LANGS = ("fr", "es", "de", "it", "ko")
TARGET_LANG = "en"
ALL_LANGS = SOURCE_LANGS + (TARGET_LANG,)


class Domain(enum.Enum):
    GENERAL = "general"
    MEDICAL = "medical"
    BACK_TRANSLATED = "bt"


@dataclass(frozen=True)
class SentencePair:
    """One aligned source/target record; the target language is always English."""

    source_text: str
    target_text: str
    source_lang: str
    domain: Domain
    origin: str

    def __post_init__(self):
        if self.source_lang not in SOURCE_LANGS:
            raise DataError(
                f"unknown language code {self.source_lang!r}; "
                f"expected one of {', '.join(SOURCE_LANGS)}"
            )


@dataclass(frozen=True)
class ManifestEntry:
    source_path: Path
    target_path: Path
    source_lang: str
    domain: Domain
    line_count: int


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[ManifestEntry, ...]

    def total_pairs(self) -> int:
        return sum(e.line_count for e in self.entries)


@dataclass(frozen=True)
class TestSetRecord:
    source_text: str
    reference_text: str
    subset: str | None = None


def _count_lines(path: Path) -> int:
    n = 0
    with open(path, "rb") as f:
        for _ in f:
            n += 1
    return n


def _parse_manifest_line(raw: str, lineno: int, base_dir: Path) -> ManifestEntry:
    fields = raw.split("\t")
    if len(fields) != 4:
        raise DataError(
            f"manifest line {lineno}: expected 4 tab-separated fields "
            f"(source_path, target_path, lang, domain), got {len(fields)}"
        )
    src, tgt, lang, domain_label = fields
    if lang not in SOURCE_LANGS:
        raise DataError(
            f"manifest line {lineno}: unknown language code {lang!r}; "
            f"expected one of {', '.join(SOURCE_LANGS)}"
        )
    try:
        domain = Domain(domain_label)
    except ValueError:
        raise DataError(
            f"manifest line {lineno}: unknown domain label {domain_label!r}; "
            f"expected one of {', '.join(d.value for d in Domain)}"
        ) from None
    src_path = (base_dir / src).resolve()
    tgt_path = (base_dir / tgt).resolve()
    return ManifestEntry(src_path, tgt_path, lang, domain, line_count=-1)


def ingest(manifest_path: str | os.PathLike) -> CorpusManifest:
    """Parse and validate a manifest file.

    Relative corpus paths are resolved against the manifest's directory.
    Line counts of each parallel file pair are verified to match.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise DataError(f"manifest file not found: {manifest_path}")
    base_dir = manifest_path.parent
    entries = []
    with open(manifest_path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            entry = _parse_manifest_line(line, lineno, base_dir)
            for path in (entry.source_path, entry.target_path):
                if not path.is_file():
                    raise DataError(f"manifest line {lineno}: corpus file not found: {path}")
            n_src = _count_lines(entry.source_path)
            n_tgt = _count_lines(entry.target_path)
            if n_src != n_tgt:
                raise DataError(
                    f"line-count mismatch: {entry.source_path} has {n_src} lines "
                    f"but {entry.target_path} has {n_tgt} lines"
                )
            entries.append(replace(entry, line_count=n_src))
    return CorpusManifest(tuple(entries))


def write_manifest(manifest: CorpusManifest, path: str | os.PathLike) -> None:
    """Write a manifest file; paths are stored relative to the file's directory."""
    path = Path(path)
    base = path.resolve().parent
    lines = []
    for e in manifest.entries:
        src = os.path.relpath(e.source_path, base)
        tgt = os.path.relpath(e.target_path, base)
        lines.append(f"{src}\t{tgt}\t{e.source_lang}\t{e.domain.value}\n")
    with open(path, "w", encoding="utf-8") as f:
        f.writelines(lines)


def _decoded_lines(path: Path) -> Iterator[str]:
    """Yield decoded lines; invalid UTF-8 is a hard error naming file and line."""
    with open(path, "rb") as f:
        for lineno, raw in enumerate(f, start=1):
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise DataError(f"{path}, line {lineno}: invalid UTF-8 ({exc.reason})") from None
            yield text.rstrip("\n").rstrip("\r")


def stream_pairs(manifest: CorpusManifest) -> Iterator[SentencePair]:
    """Stream pairs in manifest order, file order within each entry.

    Each call produces an independent cursor; memory use is one line at a
    time regardless of corpus size.
    """
    for entry in manifest.entries:
        origin = str(entry.source_path)
        src_lines = _decoded_lines(entry.source_path)
        tgt_lines = _decoded_lines(entry.target_path)
        for src, tgt in zip(src_lines, tgt_lines):
            yield SentencePair(src, tgt, entry.source_lang, entry.domain, origin)


_SUBSETS = {"arxiv": "ArXiv", "kcdc": "KCDC", "ArXiv": "ArXiv", "KCDC": "KCDC"}


def load_test_set(path: str | os.PathLike) -> list[TestSetRecord]:
    """Load a tab-separated test set: source, reference and optional subset."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"test-set file not found: {path}")
    records = []
    for lineno, line in enumerate(_decoded_lines(path), start=1):
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise DataError(
                f"{path}, line {lineno}: expected 2 or 3 tab-separated fields, got {len(fields)}"
            )
        subset = None
        if len(fields) == 3:
            subset = _SUBSETS.get(fields[2], fields[2])
        records.append(TestSetRecord(fields[0], fields[1], subset))
    with_subset = sum(1 for r in records if r.subset is not None)
    if 0 < with_subset < len(records):
        raise DataError(f"{path}: subset labels must be present on all lines or none")
    return records
