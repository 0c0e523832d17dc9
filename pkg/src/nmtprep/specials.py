"""Reserved symbols shared across the whole pipeline.

The eight special tokens occupy vocabulary indices 0..7 in this fixed order.
Case markers and domain tags live in the shared prefix because case markers
appear in English output and domain tags in every source stream.
"""

UNK = "<unk>"
PAD = "<pad>"
BOS = "<s>"
EOS = "</s>"
MEDICAL_TAG = "<medical>"
BT_TAG = "<bt>"
TITLE_MARKER = "<T>"
UPPER_MARKER = "<U>"

SPECIAL_TOKENS = (UNK, PAD, BOS, EOS, MEDICAL_TAG, BT_TAG, TITLE_MARKER, UPPER_MARKER)

# Word-initial marker prefixing word-initial subword pieces; segmentation is
# reversible by plain string operations because of it.
WORD_MARKER = "▁"

CASE_MARKERS = (TITLE_MARKER, UPPER_MARKER)
DOMAIN_TAGS = (MEDICAL_TAG, BT_TAG)
