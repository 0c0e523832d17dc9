"""Per-pair cleaning and length filtering.

Cleaning is whitespace normalization plus Unicode NFKC, applied in the fixed
order: control stripping, whitespace, NFKC, whitespace again (NFKC can
introduce spaces, e.g. U+309B decomposes to space + combining mark).  The
composed cleaner is idempotent.
"""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass, field

from .corpus import SentencePair
from .errors import ConfigError, DataError
from .specials import WORD_MARKER

# The 25 code points with the Unicode White_Space property (PropList.txt).
WHITE_SPACE = frozenset(
    [0x09, 0x0A, 0x0B, 0x0C, 0x0D, 0x20, 0x85, 0xA0, 0x1680]
    + list(range(0x2000, 0x200B))
    + [0x2028, 0x2029, 0x202F, 0x205F, 0x3000]
)

_WS_RUN = re.compile("[" + "".join(re.escape(chr(c)) for c in sorted(WHITE_SPACE)) + "]+")


def normalize_whitespace(text: str) -> str:
    """Collapse every White_Space run to one ASCII space and trim the ends."""
    return _WS_RUN.sub(" ", text).strip(" ")


def normalize_nfkc(text: str) -> str:
    """Unicode NFKC normal form."""
    return unicodedata.normalize("NFKC", text)


def strip_controls(text: str) -> str:
    """Drop Cc control characters except tab and newline.

    Controls survive NFKC and break downstream tokenization; tab and newline
    are left for whitespace normalization to absorb.
    """
    if text.isascii() and text.isprintable():
        return text
    return "".join(
        c for c in text if c in "\t\n" or unicodedata.category(c) != "Cc"
    )


def clean_text(text: str) -> str:
    """The composed normalizer applied to every corpus line.

    The reserved word marker is mapped to a space up front: it may not occur
    as payload text, or segmentation would no longer be reversible.
    """
    text = strip_controls(text)
    if WORD_MARKER in text:
        text = text.replace(WORD_MARKER, " ")
    text = normalize_whitespace(text)
    text = normalize_nfkc(text)
    return normalize_whitespace(text)


def token_count(text: str) -> int:
    """Number of maximal non-space runs in whitespace-normalized text."""
    return len(text.split())


class ApplyTo(enum.Enum):
    SOURCE_ONLY = "source"
    BOTH = "both"


class DropReason(enum.Enum):
    EMPTY = "empty-after-normalization"
    TOO_LONG = "too-long"
    LANGID_SOURCE = "langid-source"
    LANGID_TARGET = "langid-target"


@dataclass(frozen=True)
class FilterConfig:
    min_tokens: int = 1
    max_tokens: int = 200
    apply_to: ApplyTo = ApplyTo.BOTH

    def __post_init__(self):
        if not 1 <= self.min_tokens <= self.max_tokens:
            raise ConfigError(
                f"need 1 <= min_tokens <= max_tokens, got "
                f"min={self.min_tokens} max={self.max_tokens}"
            )


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    reason: DropReason | None = None


def filter_pair(pair: SentencePair, cfg: FilterConfig) -> FilterDecision:
    """Length filter; boundaries are inclusive (exactly min and max are kept)."""
    sides = [pair.source_text]
    if cfg.apply_to is ApplyTo.BOTH:
        sides.append(pair.target_text)
    for text in sides:
        n = token_count(text)
        if n < cfg.min_tokens:
            return FilterDecision(False, DropReason.EMPTY)
        if n > cfg.max_tokens:
            return FilterDecision(False, DropReason.TOO_LONG)
    return FilterDecision(True)


@dataclass
class FilterReport:
    """Keep/drop tally for one filtering stage; counts always reconcile."""

    input_pairs: int = 0
    kept: int = 0
    dropped_by_reason: dict[DropReason, int] = field(default_factory=dict)

    def record(self, decision: FilterDecision) -> None:
        self.input_pairs += 1
        if decision.keep:
            self.kept += 1
        else:
            self.dropped_by_reason[decision.reason] = (
                self.dropped_by_reason.get(decision.reason, 0) + 1
            )

    def merge(self, other: "FilterReport") -> "FilterReport":
        merged = FilterReport(
            input_pairs=self.input_pairs + other.input_pairs,
            kept=self.kept + other.kept,
            dropped_by_reason=dict(self.dropped_by_reason),
        )
        for reason, count in other.dropped_by_reason.items():
            merged.dropped_by_reason[reason] = merged.dropped_by_reason.get(reason, 0) + count
        return merged

    def check(self) -> None:
        if self.kept + sum(self.dropped_by_reason.values()) != self.input_pairs:
            raise DataError("filter report does not reconcile: kept + dropped != input")

    def to_text(self) -> str:
        self.check()
        lines = [f"input\t{self.input_pairs}", f"kept\t{self.kept}"]
        for reason in DropReason:
            if reason in self.dropped_by_reason:
                lines.append(f"{reason.value}\t{self.dropped_by_reason[reason]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FilterReport":
        report = cls()
        for line in text.splitlines():
            if not line:
                continue
            key, _, value = line.partition("\t")
            if key == "input":
                report.input_pairs = int(value)
            elif key == "kept":
                report.kept = int(value)
            else:
                report.dropped_by_reason[DropReason(key)] = int(value)
        report.check()
        return report


def clean_pair(pair: SentencePair) -> SentencePair:
    """Apply the composed normalizer to both sides of a pair."""
    return SentencePair(
        clean_text(pair.source_text),
        clean_text(pair.target_text),
        pair.source_lang,
        pair.domain,
        pair.origin,
    )
