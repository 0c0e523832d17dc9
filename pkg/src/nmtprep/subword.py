"""Shared lower-cased BPE: learning, application, and training-line sampling.

Learning follows the textbook procedure: words are whitespace tokens whose
symbol sequences start with the reserved word marker, and the most frequent
adjacent symbol pair is merged until the target number of merges is reached
or no pair occurs at least twice.  Count ties break on the lexicographically
smallest (left, right) pair so learning is deterministic and can be checked
against a naive reference implementation.
"""

from __future__ import annotations

import heapq
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from . import kernels
from .casing import fold_case
from .corpus import CorpusManifest, SOURCE_LANGS, TARGET_LANG, stream_pairs
from .errors import ConfigError, DataError
from .rng import derive_seed, line_key
from .specials import WORD_MARKER


@dataclass(frozen=True)
class MergeList:
    """Ordered BPE merge rules; the segmenter is fully determined by them."""

    merges: tuple[tuple[str, str], ...]
    word_boundary_marker: str = WORD_MARKER

    def __post_init__(self):
        produced = set()
        seen = set()
        for left, right in self.merges:
            if (left, right) in seen:
                raise DataError(f"duplicate merge pair ({left!r}, {right!r})")
            seen.add((left, right))
            for operand in (left, right):
                if len(operand) > 1 and operand not in produced:
                    raise DataError(
                        f"merge operand {operand!r} is neither a single character "
                        "nor the product of an earlier merge"
                    )
            produced.add(left + right)

    def __len__(self) -> int:
        return len(self.merges)


@dataclass(frozen=True)
class BpeLearnConfig:
    merges_target: int
    lines_per_language: int = 100_000
    singleton_min_count: int = 20
    english_min_count: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.merges_target < 1:
            raise ConfigError(f"merges_target must be >= 1, got {self.merges_target}")
        if self.lines_per_language < 1:
            raise ConfigError("lines_per_language must be >= 1")
        if self.singleton_min_count < 0 or self.english_min_count < 0:
            raise ConfigError("frequency thresholds must be non-negative")


def _word_symbols(word: str) -> list[str]:
    return [WORD_MARKER] + list(word)


def bpe_learn(lines: Iterable[str], cfg: BpeLearnConfig) -> MergeList:
    """Learn merges from lower-cased, normalized lines."""
    word_freqs: dict[str, int] = {}
    for line in lines:
        for word in line.split():
            word_freqs[word] = word_freqs.get(word, 0) + 1
    if not word_freqs:
        raise DataError("cannot learn BPE from empty input")

    seqs = {w: _word_symbols(w) for w in word_freqs}
    pair_counts: dict[tuple[str, str], int] = {}
    pair_words: dict[tuple[str, str], set[str]] = {}
    for w, freq in word_freqs.items():
        seq = seqs[w]
        for i in range(len(seq) - 1):
            pair = (seq[i], seq[i + 1])
            pair_counts[pair] = pair_counts.get(pair, 0) + freq
            pair_words.setdefault(pair, set()).add(w)

    merges: list[tuple[str, str]] = []
    while len(merges) < cfg.merges_target:
        best = None
        best_count = 1  # pairs must occur at least twice
        for pair, count in pair_counts.items():
            if count > best_count or (count == best_count and (best is None or pair < best)):
                best = pair
                best_count = count
        if best is None:
            break
        merges.append(best)
        left, right = best
        for w in sorted(pair_words[best]):
            freq = word_freqs[w]
            old = seqs[w]
            new = []
            i = 0
            limit = len(old) - 1
            while i < len(old):
                if i < limit and old[i] == left and old[i + 1] == right:
                    new.append(left + right)
                    i += 2
                else:
                    new.append(old[i])
                    i += 1
            for i in range(len(old) - 1):
                pair = (old[i], old[i + 1])
                pair_counts[pair] -= freq
                if pair_counts[pair] <= 0:
                    del pair_counts[pair]
                    del pair_words[pair]
                elif pair in pair_words:
                    pair_words[pair].discard(w)
            for i in range(len(new) - 1):
                pair = (new[i], new[i + 1])
                pair_counts[pair] = pair_counts.get(pair, 0) + freq
                pair_words.setdefault(pair, set()).add(w)
            seqs[w] = new
    return MergeList(tuple(merges))


class Segmenter:
    """Applies a merge list to text, memoizing per-word segmentations."""

    def __init__(self, merges: MergeList):
        self.merges = merges
        self._merge_list = list(merges.merges)
        self._ranks = {pair: i for i, pair in enumerate(merges.merges)}
        self._cache: dict[str, tuple[str, ...]] = {}

    def segment_word(self, word: str) -> tuple[str, ...]:
        pieces = self._cache.get(word)
        if pieces is None:
            pieces = tuple(
                kernels.apply_ranked_merges(_word_symbols(word), self._ranks, self._merge_list)
            )
            if len(self._cache) < 1_000_000:
                self._cache[word] = pieces
        return pieces

    def segment_text(self, text: str) -> list[str]:
        out: list[str] = []
        for word in text.split(" "):
            if word:
                out.extend(self.segment_word(word))
        return out


def bpe_apply(merges: MergeList, text: str) -> list[str]:
    """Segment lower-cased, normalized text into subword pieces."""
    return Segmenter(merges).segment_text(text)


def detokenize_pieces(pieces: Iterable[str]) -> str:
    """Invert segmentation: join pieces and turn word markers into spaces."""
    return "".join(pieces).replace(WORD_MARKER, " ").strip(" ")


class _SmallestKeeper:
    """Keeps the k entries with the smallest (key, index) over a stream."""

    def __init__(self, k: int):
        self.k = k
        self._heap: list[tuple[int, int, str]] = []  # (-key, -index, text)

    def offer(self, key: int, index: int, text: str) -> None:
        item = (-key, -index, text)
        if len(self._heap) < self.k:
            heapq.heappush(self._heap, item)
        elif item > self._heap[0]:
            heapq.heapreplace(self._heap, item)

    def result(self) -> list[str]:
        ordered = sorted(self._heap, reverse=True)
        return [text for _, _, text in ordered]


def sample_training_lines(manifest: CorpusManifest, cfg: BpeLearnConfig) -> list[str]:
    """Draw up to lines_per_language lines per language, lower-cased.

    Each of the six languages (five sources plus English targets) is sampled
    uniformly without replacement: line i of a language's stream gets the key
    line_key(seed_lang, i) and the k smallest keys win.  The draw is
    reproducible from the seed alone.
    """
    keepers = {lang: _SmallestKeeper(cfg.lines_per_language) for lang in SOURCE_LANGS}
    keepers[TARGET_LANG] = _SmallestKeeper(cfg.lines_per_language)
    seeds = {lang: derive_seed(cfg.seed, f"bpe-sample:{lang}") for lang in keepers}
    counters = {lang: 0 for lang in keepers}
    for pair in stream_pairs(manifest):
        lang = pair.source_lang
        i = counters[lang]
        keepers[lang].offer(line_key(seeds[lang], i), i, pair.source_text)
        counters[lang] = i + 1
        j = counters[TARGET_LANG]
        keepers[TARGET_LANG].offer(line_key(seeds[TARGET_LANG], j), j, pair.target_text)
        counters[TARGET_LANG] = j + 1
    lines: list[str] = []
    for lang in SOURCE_LANGS + (TARGET_LANG,):
        lines.extend(fold_case(text) for text in keepers[lang].result())
    return lines


MERGES_HEADER = "#nmtprep-merges v1"


def write_merges(merges: MergeList, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(MERGES_HEADER + "\n")
        for left, right in merges.merges:
            f.write(f"{left} {right}\n")


def read_merges(path: str | os.PathLike) -> MergeList:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if not header.startswith("#"):
            raise DataError(f"{path}: missing merges header line")
        pairs = []
        for lineno, line in enumerate(f, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) != 2:
                raise DataError(f"{path}, line {lineno}: expected 'left right'")
            pairs.append((parts[0], parts[1]))
    return MergeList(tuple(pairs))
