"""Items are the unit of data flowing through a task network.

Each item wraps one payload (plain text, a URL, an HTTP exchange, a parsed
document tree, or an extracted record) plus the name of the operator that
produced it.  Payloads are immutable so an item can be fanned out to several
successors without copying.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union
from xml.etree import ElementTree

HTTP_METHODS = ("GET", "POST", "HEAD")


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Url:
    value: str


@dataclass(frozen=True)
class HttpRequest:
    method: str
    url: str
    headers: tuple[tuple[str, str], ...] = ()
    body: bytes = b""

    def __post_init__(self) -> None:
        if self.method not in HTTP_METHODS:
            raise ValueError(f"unsupported HTTP method: {self.method!r}")


@dataclass(frozen=True)
class HttpResponse:
    status: int
    headers: tuple[tuple[str, str], ...] = ()
    body: bytes = b""
    url: str = ""

    def __post_init__(self) -> None:
        if not 100 <= self.status <= 599:
            raise ValueError(f"HTTP status out of range: {self.status}")

    def header(self, name: str, default: str = "") -> str:
        """Case-insensitive header lookup; first match wins."""
        wanted = name.lower()
        for key, value in self.headers:
            if key.lower() == wanted:
                return value
        return default

    def text(self) -> str:
        """Decode the body using the content-type charset, UTF-8 otherwise."""
        content_type = self.header("content-type")
        charset = "utf-8"
        for part in content_type.split(";")[1:]:
            part = part.strip()
            if part.lower().startswith("charset="):
                charset = part.split("=", 1)[1].strip() or "utf-8"
        try:
            return self.body.decode(charset, errors="replace")
        except LookupError:
            return self.body.decode("utf-8", errors="replace")


@dataclass(frozen=True)
class Document:
    root: ElementTree.Element

    def text_lines(self) -> str:
        """The document's text chunks, one stripped chunk per line."""
        chunks = []
        for elem in self.root.iter():
            for piece in (elem.text, elem.tail):
                if piece and piece.strip():
                    chunks.append(piece.strip())
        return "\n".join(chunks)


@dataclass(frozen=True)
class Record:
    fields: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        names = [name for name, _ in self.fields]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate record field names: {names}")

    @classmethod
    def from_pairs(cls, pairs) -> "Record":
        return cls(tuple((str(k), str(v)) for k, v in pairs))

    def get(self, name: str, default: str | None = None) -> str | None:
        for key, value in self.fields:
            if key == name:
                return value
        return default

    def as_dict(self) -> dict[str, str]:
        return dict(self.fields)


Payload = Union[Text, Url, HttpRequest, HttpResponse, Document, Record]

_KIND_NAMES = {
    Text: "text",
    Url: "url",
    HttpRequest: "request",
    HttpResponse: "response",
    Document: "document",
    Record: "record",
}


@dataclass(frozen=True)
class Item:
    payload: Payload
    provenance: str = ""

    @property
    def kind(self) -> str:
        return _KIND_NAMES[type(self.payload)]


def payload_text(item: Item) -> str | None:
    """Best-effort textual view of an item, None for non-textual payloads."""
    payload = item.payload
    if isinstance(payload, Text):
        return payload.value
    if isinstance(payload, Url):
        return payload.value
    if isinstance(payload, HttpResponse):
        return payload.text()
    return None
