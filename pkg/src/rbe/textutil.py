"""Text normalization and word splitting used by both the rule engine and the encoder."""

import re
import unicodedata

_WORD_SPLIT = re.compile(r"[^0-9a-z]+")


def normalize(text: str) -> str:
    """NFC-normalize and lowercase."""
    return unicodedata.normalize("NFC", text).lower()


def words(text: str) -> list[str]:
    """Lowercased tokens, split on any run of non-alphanumeric characters."""
    return [w for w in _WORD_SPLIT.split(normalize(text)) if w]
