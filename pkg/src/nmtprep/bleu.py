"""Corpus-level BLEU with brevity penalty and per-subset breakdowns.

Unsmoothed corpus BLEU: clipped n-gram matches are pooled over all segments
before the precisions are taken, uniform 1/4 weights up to 4-grams, and
BP = exp(1 - r/c) when the hypothesis side is shorter.  Any zero precision
zeroes the score.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass

from .corpus import TestSetRecord
from .errors import DataError

MAX_ORDER = 4


@dataclass(frozen=True)
class BleuReport:
    precisions: tuple[float, float, float, float]
    brevity_penalty: float
    hypothesis_length: int
    reference_length: int
    score: float
    subset_scores: dict[str, float] | None = None

    def to_text(self) -> str:
        lines = [
            f"score\t{self.score:.4f}",
            f"bp\t{self.brevity_penalty:.6f}",
            f"hyp_len\t{self.hypothesis_length}",
            f"ref_len\t{self.reference_length}",
        ]
        for n, p in enumerate(self.precisions, start=1):
            lines.append(f"p{n}\t{p:.6f}")
        if self.subset_scores is not None:
            for name, score in self.subset_scores.items():
                lines.append(f"subset\t{name}\t{score:.4f}")
        return "\n".join(lines) + "\n"


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_corpus(hypotheses: list[list[str]], references: list[list[str]]) -> BleuReport:
    """Corpus BLEU over tokenized segments (single reference per segment)."""
    if len(hypotheses) != len(references):
        raise DataError(
            f"hypothesis/reference count mismatch: {len(hypotheses)} vs {len(references)}"
        )
    if not hypotheses:
        raise DataError("cannot score an empty corpus")
    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_ORDER + 1):
            hyp_counts = _ngram_counts(hyp, n)
            if not hyp_counts:
                continue
            ref_counts = _ngram_counts(ref, n)
            totals[n - 1] += sum(hyp_counts.values())
            matches[n - 1] += sum(
                min(count, ref_counts[gram]) for gram, count in hyp_counts.items()
            )
    precisions = tuple(
        matches[i] / totals[i] if totals[i] else 0.0 for i in range(MAX_ORDER)
    )
    if hyp_len == 0:
        bp = 0.0
    elif hyp_len >= ref_len:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_len / hyp_len)
    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        score = 100.0 * bp * math.exp(sum(math.log(p) for p in precisions) / MAX_ORDER)
    return BleuReport(precisions, bp, hyp_len, ref_len, score)


def bleu_by_subset(
    records: list[TestSetRecord],
    hypotheses: list[list[str]],
    lowercase: bool = False,
) -> BleuReport:
    """Full-corpus BLEU plus one score per declared subset.

    The full score is computed on pooled counts over all segments, which in
    general differs from averaging the subset scores.
    """
    if len(records) != len(hypotheses):
        raise DataError(
            f"record/hypothesis count mismatch: {len(records)} vs {len(hypotheses)}"
        )
    references = [bleu_tokenize(r.reference_text, lowercase) for r in records]
    full = bleu_corpus(hypotheses, references)
    subsets: dict[str, float] = {}
    seen: list[str] = []
    for r in records:
        if r.subset is not None and r.subset not in seen:
            seen.append(r.subset)
    for name in seen:
        idx = [i for i, r in enumerate(records) if r.subset == name]
        part = bleu_corpus([hypotheses[i] for i in idx], [references[i] for i in idx])
        subsets[name] = part.score
    return BleuReport(
        full.precisions,
        full.brevity_penalty,
        full.hypothesis_length,
        full.reference_length,
        full.score,
        subset_scores=subsets if seen else None,
    )


def bleu_tokenize(text: str, lowercase: bool = False) -> list[str]:
    """Split on whitespace after isolating punctuation and symbol characters."""
    if lowercase:
        text = text.lower()
    out = []
    for c in text:
        if unicodedata.category(c)[0] in "PS":
            out.append(" ")
            out.append(c)
            out.append(" ")
        else:
            out.append(c)
    return "".join(out).split()
