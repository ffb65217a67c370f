"""Markup preprocessing into a flat token stream.

Documents are cleaned and encoded before any learning happens: comments and
script/style content disappear, entities are decoded, tags survive as
open/close markers with lowercased names and attributes dropped, and text is
split so that runs of alphanumeric characters form words while every other
non-space character stands alone as its own word.  Data living inside
attributes is therefore out of reach of learned patterns.

Preprocessing is total: malformed markup is tokenized permissively, never
rejected.  TOKENIZER_VERSION is stamped into saved wrappers; applying a
wrapper built by a different tokenizer is an error, not a silent re-encode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from html.parser import HTMLParser

TOKENIZER_VERSION = "1"

TAG_OPEN = "open"
TAG_CLOSE = "close"
WORD = "word"

_SKIPPED_CONTENT = {"script", "style"}


@dataclass(frozen=True)
class Token:
    kind: str  # open | close | word
    text: str  # tag name or word text
    position: int = field(default=-1, compare=False)


def tag_open(name: str, position: int = -1) -> Token:
    return Token(TAG_OPEN, name, position)


def tag_close(name: str, position: int = -1) -> Token:
    return Token(TAG_CLOSE, name, position)


def word(text: str, position: int = -1) -> Token:
    return Token(WORD, text, position)


def split_words(text: str) -> list[str]:
    """Word splitting shared by documents and example values."""
    words: list[str] = []
    run = ""
    for ch in text:
        if ch.isspace():
            if run:
                words.append(run)
                run = ""
        elif ch.isalnum():
            run += ch
        else:
            if run:
                words.append(run)
                run = ""
            words.append(ch)
    if run:
        words.append(run)
    return words


class _Tokenizer(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.tokens: list[Token] = []
        self._skipping: str | None = None

    def _emit(self, kind: str, text: str) -> None:
        self.tokens.append(Token(kind, text, len(self.tokens)))

    def handle_starttag(self, tag, attrs):
        if self._skipping:
            return
        if tag in _SKIPPED_CONTENT:
            self._skipping = tag
            return
        self._emit(TAG_OPEN, tag)

    def handle_endtag(self, tag):
        if self._skipping:
            if tag == self._skipping:
                self._skipping = None
            return
        self._emit(TAG_CLOSE, tag)

    def handle_startendtag(self, tag, attrs):
        if self._skipping or tag in _SKIPPED_CONTENT:
            return
        self._emit(TAG_OPEN, tag)
        self._emit(TAG_CLOSE, tag)

    def handle_data(self, data):
        if self._skipping:
            return
        for piece in split_words(data):
            self._emit(WORD, piece)


def preprocess(document: str) -> list[Token]:
    tokenizer = _Tokenizer()
    tokenizer.feed(document)
    tokenizer.close()
    return tokenizer.tokens
