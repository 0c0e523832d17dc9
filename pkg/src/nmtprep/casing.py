"""Case classification and the reversible per-character case fold.

Only characters whose lower-casing is an exact 1:1 round trip take part in
casing: c must be upper-case, c.lower() must be a single lower-case
character, and upper-casing it must give back c.  Everything else (dotted
capital I, the capital sharp s, titlecase digraphs, caseless scripts) is
treated as caseless so that decode(encode(s)) == s holds exactly.
"""

from __future__ import annotations

import enum


class CaseClass(enum.Enum):
    LOWER = "lower"
    TITLE = "title"
    UPPER = "upper"
    MIXED = "mixed"


def is_foldable_upper(c: str) -> bool:
    """True when c can be lower-cased and restored exactly."""
    if not c.isupper():
        return False
    low = c.lower()
    return len(low) == 1 and low.islower() and low.upper() == c


def is_cased(c: str) -> bool:
    return c.islower() or is_foldable_upper(c)


def fold_case(text: str) -> str:
    """Length-preserving lower-casing; unsafe characters pass through."""
    if text.islower() or not text:
        return text
    return "".join(c.lower() if is_foldable_upper(c) else c for c in text)


def restore_upper(c: str) -> str:
    """Inverse of fold_case for one character; identity when unsafe."""
    if c.islower():
        up = c.upper()
        if len(up) == 1:
            return up
    return c


def classify_case(span: str) -> CaseClass:
    """Case class of an original-cased span.

    A single cased upper-case character classifies Title, not Upper; Upper
    requires at least two cased characters, all upper.
    """
    flags = [is_foldable_upper(c) for c in span if is_cased(c)]
    if not flags or not any(flags):
        return CaseClass.LOWER
    if all(flags):
        return CaseClass.UPPER if len(flags) >= 2 else CaseClass.TITLE
    if flags[0] and not any(flags[1:]):
        return CaseClass.TITLE
    return CaseClass.MIXED


def split_mixed_span(span: str) -> list[int]:
    """Boundary offsets partitioning a mixed-case span into defined-case runs.

    A boundary falls (a) before an upper-case character whose previous cased
    character is lower ("MacDonalds" -> "Mac" + "Donalds"), and (b) before
    the last upper-case character of an upper run that is followed by a
    lower-case character ("HTMLPage" -> "HTML" + "Page").  Returned offsets
    exclude 0 and len(span).
    """
    positions = [i for i, c in enumerate(span) if is_cased(c)]
    flags = [is_foldable_upper(span[i]) for i in positions]
    boundaries = []
    for j in range(1, len(positions)):
        if flags[j] and not flags[j - 1]:
            boundaries.append(positions[j])
        elif not flags[j] and flags[j - 1] and j >= 2 and flags[j - 2]:
            boundaries.append(positions[j - 1])
    return boundaries
