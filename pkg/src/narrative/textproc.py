"""Text normalization, tokenization, and hashtag/emoji extraction.

Cleaning is deferred to the labeling stage, so these are pure functions over
raw post text. All of them are safe for unrestricted parallel use.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

URL_RE = re.compile(r"https?://\S+")
# Handle must start and end alphanumeric so sentence punctuation after a
# mention is left in place.
MENTION_RE = re.compile(r"@[A-Za-z0-9](?:[A-Za-z0-9.\-]*[A-Za-z0-9])?")
HASHTAG_RE = re.compile(r"#(\w+)", re.UNICODE)
# Alphanumeric runs joined by internal apostrophes (ASCII or U+2019);
# underscore is a boundary.
TOKEN_RE = re.compile(r"[^\W_]+(?:['’][^\W_]+)*", re.UNICODE)
_WS_RE = re.compile(r"\s+")

# Emoji detection by explicit Unicode block ranges; auditable and
# dependency-free. ZWJ sequences, variation selectors, skin-tone modifiers,
# keycaps, and regional-indicator flag pairs are folded into one item each.
EMOJI_RANGES = (
    (0x1F300, 0x1F5FF),  # Miscellaneous Symbols and Pictographs
    (0x1F600, 0x1F64F),  # Emoticons
    (0x1F680, 0x1F6FF),  # Transport and Map Symbols
    (0x1F900, 0x1F9FF),  # Supplemental Symbols and Pictographs
    (0x1FA70, 0x1FAFF),  # Symbols and Pictographs Extended-A
    (0x2600, 0x26FF),    # Miscellaneous Symbols
    (0x2700, 0x27BF),    # Dingbats
)
_REGIONAL_LO, _REGIONAL_HI = 0x1F1E6, 0x1F1FF
_ZWJ = "‍"
_VS16 = "️"
_KEYCAP = "⃣"
_SKIN_LO, _SKIN_HI = 0x1F3FB, 0x1F3FF


@dataclass(frozen=True)
class NormalizedText:
    cleaned: str
    removed_urls: int
    removed_mentions: int


def normalize(text: str) -> NormalizedText:
    """Clean raw post text.

    NFC normalization, then control-character stripping (whitespace-class
    controls collapse to spaces later; others are dropped so removal cannot
    splice new URL/mention matches together), then URL and @mention removal
    and whitespace collapse. Case is preserved; lowercasing is tokenize()'s
    job.
    """
    text = unicodedata.normalize("NFC", text)
    text = "".join(
        ch for ch in text if ch.isspace() or not unicodedata.category(ch).startswith("C")
    )
    text, n_urls = URL_RE.subn(" ", text)
    text, n_mentions = MENTION_RE.subn(" ", text)
    text = _WS_RE.sub(" ", text).strip()
    return NormalizedText(cleaned=text, removed_urls=n_urls, removed_mentions=n_mentions)


def tokenize(n: NormalizedText | str) -> list[str]:
    """Lowercase tokens: alphanumeric runs with internal apostrophes kept,
    tokens shorter than 2 characters dropped, hashtag bodies kept without #.
    """
    text = n.cleaned if isinstance(n, NormalizedText) else n
    return [t for t in (m.group(0).lower() for m in TOKEN_RE.finditer(text)) if len(t) >= 2]


def is_valid_content(n: NormalizedText, min_tokens: int = 3) -> bool:
    if min_tokens < 1:
        raise ValueError("min_tokens must be >= 1")
    return len(tokenize(n)) >= min_tokens


def extract_hashtags(text: str) -> list[str]:
    """All #word runs in raw text, lowercased, order kept, duplicates kept."""
    return [m.group(1).lower() for m in HASHTAG_RE.finditer(text)]


def _is_emoji_base(cp: int) -> bool:
    return any(lo <= cp <= hi for lo, hi in EMOJI_RANGES)


def _is_regional(cp: int) -> bool:
    return _REGIONAL_LO <= cp <= _REGIONAL_HI


def extract_emojis(text: str) -> list[str]:
    """Emoji grapheme clusters in order of appearance, duplicates kept.

    A cluster is a base codepoint from EMOJI_RANGES (or a flag pair, or a
    keycap sequence) plus any attached variation selectors, skin tones, and
    ZWJ continuations.
    """
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        cp = ord(text[i])
        if _is_regional(cp):
            if i + 1 < n and _is_regional(ord(text[i + 1])):
                out.append(text[i : i + 2])
                i += 2
            else:
                out.append(text[i])
                i += 1
            continue
        if text[i] in "0123456789#*" and _scan_keycap(text, i) > i:
            j = _scan_keycap(text, i)
            out.append(text[i:j])
            i = j
            continue
        if _is_emoji_base(cp):
            j = _scan_cluster(text, i)
            out.append(text[i:j])
            i = j
            continue
        i += 1
    return out


def _scan_keycap(text: str, i: int) -> int:
    j = i + 1
    if j < len(text) and text[j] == _VS16:
        j += 1
    if j < len(text) and text[j] == _KEYCAP:
        return j + 1
    return i


def _scan_modifiers(text: str, j: int) -> int:
    while j < len(text) and (text[j] == _VS16 or _SKIN_LO <= ord(text[j]) <= _SKIN_HI):
        j += 1
    return j


def _scan_cluster(text: str, i: int) -> int:
    j = _scan_modifiers(text, i + 1)
    while j < len(text) and text[j] == _ZWJ:
        k = j + 1
        if k < len(text) and (_is_emoji_base(ord(text[k])) or _is_regional(ord(text[k]))):
            j = _scan_modifiers(text, k + 1)
        else:
            break
    return j
