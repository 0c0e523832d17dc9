"""Reversible inline-casing codec over BPE pieces.

Text is lower-cased with a 1:1 per-character fold, segmented, and each piece
is aligned back to its original-cased span.  Uniform-case pieces emit one
marker token after the piece (`<T>` title, `<U>` all caps, nothing for
lower); mixed-case pieces are first split into sub-pieces of defined case.
The token stream decodes back to the exact original string.
"""

from __future__ import annotations

from dataclasses import dataclass

from .casing import (
    CaseClass,
    classify_case,
    fold_case,
    is_cased,
    restore_upper,
    split_mixed_span,
)
from .errors import DataError
from .specials import TITLE_MARKER, UPPER_MARKER, WORD_MARKER
from .subword import MergeList, Segmenter

_MARKER_FOR_CLASS = {CaseClass.TITLE: TITLE_MARKER, CaseClass.UPPER: UPPER_MARKER}


@dataclass(frozen=True)
class CasedToken:
    """A lower-cased piece together with its case class."""

    piece: str
    case_class: CaseClass

    def __post_init__(self):
        if self.case_class is CaseClass.MIXED:
            raise DataError("CasedToken requires a defined case class")
        if any(c.isupper() for c in self.piece if is_cased(c)):
            raise DataError(f"piece {self.piece!r} contains an upper-case character")
        if self.case_class is not CaseClass.LOWER and not any(is_cased(c) for c in self.piece):
            raise DataError(
                f"{self.case_class.value} piece {self.piece!r} has no cased character"
            )


def _emit(piece: str, span: str, out: list[str]) -> None:
    cls = classify_case(span)
    if cls is not CaseClass.MIXED:
        out.append(piece)
        marker = _MARKER_FOR_CLASS.get(cls)
        if marker is not None:
            out.append(marker)
        return
    # Split the piece and its original span at the same offsets; the first
    # sub-piece keeps the word marker when the piece carried one.
    offset = len(piece) - len(span)
    start = 0
    for boundary in split_mixed_span(span) + [len(span)]:
        piece_start = 0 if start == 0 else offset + start
        _emit(piece[piece_start : offset + boundary], span[start:boundary], out)
        start = boundary


def case_encode(original_text: str, merges: MergeList, segmenter: Segmenter | None = None) -> list[str]:
    """Segment normalized text and annotate pieces with case markers."""
    seg = segmenter if segmenter is not None else Segmenter(merges)
    out: list[str] = []
    for word in original_text.split(" "):
        if not word:
            continue
        pos = 0
        for piece in seg.segment_word(fold_case(word)):
            content_len = len(piece) - 1 if piece.startswith(WORD_MARKER) else len(piece)
            span = word[pos : pos + content_len]
            pos += content_len
            _emit(piece, span, out)
    return out


def _title_piece(piece: str) -> str:
    for i, c in enumerate(piece):
        if is_cased(c):
            return piece[:i] + restore_upper(c) + piece[i + 1 :]
    return piece


def _upper_piece(piece: str) -> str:
    return "".join(restore_upper(c) for c in piece)


def case_decode(tokens: list[str]) -> str:
    """Exact inverse of case_encode.

    Raises on malformed streams: a case marker with no preceding piece, or
    two case markers in a row.
    """
    pieces: list[str] = []
    prev_was_marker = True  # a leading marker is malformed
    for position, token in enumerate(tokens):
        if token == TITLE_MARKER or token == UPPER_MARKER:
            if prev_was_marker:
                raise DataError(
                    f"malformed token stream at position {position}: "
                    f"case marker {token} must directly follow a piece"
                )
            pieces[-1] = _title_piece(pieces[-1]) if token == TITLE_MARKER else _upper_piece(pieces[-1])
            prev_was_marker = True
        else:
            pieces.append(token)
            prev_was_marker = False
    return "".join(pieces).replace(WORD_MARKER, " ").strip(" ")
