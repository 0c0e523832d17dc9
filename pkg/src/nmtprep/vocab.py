"""Shared vocabulary with the English block sorted to the front.

Pieces are counted over the full segmented corpus (sources and English
targets tracked separately).  Single-character pieces occurring fewer than
singleton_min_count times are removed; pieces whose English-side count meets
english_min_count form the English block, placed right after the specials so
the target-side vocabulary is a prefix of the shared one (the tied-embedding
contract).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import CorpusManifest, stream_pairs
from .errors import DataError
from .inline_case import case_encode
from .specials import CASE_MARKERS, SPECIAL_TOKENS, UNK, WORD_MARKER
from .subword import BpeLearnConfig, MergeList, Segmenter


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    counts: tuple[int, ...]
    english_block_size: int
    special_block_size: int = len(SPECIAL_TOKENS)
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.tokens[: self.special_block_size] != SPECIAL_TOKENS:
            raise DataError("vocabulary must start with the reserved special tokens")
        if len(self.tokens) != len(self.counts):
            raise DataError("token and count lists differ in length")
        index = {}
        for i, token in enumerate(self.tokens):
            if token in index:
                raise DataError(f"duplicate token {token!r} in vocabulary")
            index[token] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def target_size(self) -> int:
        """Size of the target-side (tied-embedding) prefix."""
        return self.special_block_size + self.english_block_size

    def id_of(self, token: str) -> int:
        return self._index.get(token, 0)  # unknown id is 0

    def __contains__(self, token: str) -> bool:
        return token in self._index


def encode_ids(
    vocab: Vocabulary,
    pieces: list[str],
    target_side: bool = False,
    strict_target: bool = False,
) -> list[int]:
    """Map pieces to ids; out-of-vocabulary pieces map to the unknown id.

    Target-side encoding uses the target dictionary, i.e. the English+special
    prefix: pieces outside it map to the unknown id, so every produced id is
    below target_size.  With strict_target a piece resolving outside the
    prefix raises instead; callers use it where any escape can only mean a
    vocabulary construction bug (e.g. english_min_count 1).
    """
    index = vocab._index
    limit = vocab.target_size
    ids = []
    if target_side:
        for piece in pieces:
            i = index.get(piece, 0)
            if i >= limit:
                if strict_target:
                    raise DataError(
                        f"target-side piece {piece!r} falls outside the "
                        f"English+special prefix (id {i} >= {limit})"
                    )
                i = 0
            ids.append(i)
    else:
        for piece in pieces:
            ids.append(index.get(piece, 0))
    return ids


def decode_ids(vocab: Vocabulary, ids: list[int]) -> list[str]:
    tokens = vocab.tokens
    out = []
    for i in ids:
        if not 0 <= i < len(tokens):
            raise DataError(f"id {i} outside the vocabulary")
        out.append(tokens[i])
    return out


def vocab_build(manifest: CorpusManifest, merges: MergeList, cfg: BpeLearnConfig) -> Vocabulary:
    """Count pieces over the full segmented corpus and assemble the vocabulary."""
    segmenter = Segmenter(merges)
    total: dict[str, int] = {}
    english: dict[str, int] = {}
    marker_counts = {m: 0 for m in CASE_MARKERS}
    saw_any = False
    for pair in stream_pairs(manifest):
        saw_any = True
        for token in case_encode(pair.source_text, merges, segmenter):
            if token in marker_counts:
                marker_counts[token] += 1
            else:
                total[token] = total.get(token, 0) + 1
        for token in case_encode(pair.target_text, merges, segmenter):
            if token in marker_counts:
                marker_counts[token] += 1
            else:
                total[token] = total.get(token, 0) + 1
                english[token] = english.get(token, 0) + 1
    if not saw_any:
        raise DataError("cannot build a vocabulary from an empty corpus")

    # "fewer than N occurrences" is strict: exactly N survives.
    surviving = [
        p
        for p, c in total.items()
        if len(p) > 1 or p == WORD_MARKER or c >= cfg.singleton_min_count
    ]
    # English threshold is inclusive: count >= N goes into the block.
    english_block = sorted(
        (p for p in surviving if english.get(p, 0) >= cfg.english_min_count),
        key=lambda p: (-english[p], p),
    )
    in_block = set(english_block)
    rest = sorted(
        (p for p in surviving if p not in in_block),
        key=lambda p: (-total[p], p),
    )

    tokens = list(SPECIAL_TOKENS) + english_block + rest
    counts = [marker_counts.get(t, 0) for t in SPECIAL_TOKENS] + [
        total[p] for p in english_block + rest
    ]
    return Vocabulary(tuple(tokens), tuple(counts), english_block_size=len(english_block))


VOCAB_HEADER = "#nmtprep-vocab v1"


def write_vocab(vocab: Vocabulary, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(VOCAB_HEADER + "\n")
        f.write(f"#special_block_size\t{vocab.special_block_size}\n")
        f.write(f"#english_block_size\t{vocab.english_block_size}\n")
        for token, count in zip(vocab.tokens, vocab.counts):
            f.write(f"{token}\t{count}\n")


def read_vocab(path: str | os.PathLike) -> Vocabulary:
    path = Path(path)
    special_block = english_block = None
    tokens: list[str] = []
    counts: list[int] = []
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if not header.startswith("#"):
            raise DataError(f"{path}: missing vocabulary header")
        for lineno, line in enumerate(f, start=2):
            line = line.rstrip("\n")
            if line.startswith("#special_block_size\t"):
                special_block = int(line.split("\t")[1])
            elif line.startswith("#english_block_size\t"):
                english_block = int(line.split("\t")[1])
            elif line:
                parts = line.split("\t")
                if len(parts) != 2:
                    raise DataError(f"{path}, line {lineno}: expected 'token<TAB>count'")
                tokens.append(parts[0])
                counts.append(int(parts[1]))
    if special_block is None or english_block is None:
        raise DataError(f"{path}: header must record special and English block sizes")
    if special_block != len(SPECIAL_TOKENS):
        raise DataError(f"{path}: unsupported special block size {special_block}")
    return Vocabulary(tuple(tokens), tuple(counts), english_block_size=english_block)
