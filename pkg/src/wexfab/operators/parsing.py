"""Document parsing into element trees.

XML mode is strict: any well-formedness violation is an error (empty output).
HTML mode is a forgiving tag-soup builder on top of html.parser: unclosed
elements are auto-closed, stray end tags dropped, and a small set of sibling
rules mirrors how browsers treat li/p/td-style elements.
"""

from __future__ import annotations

from html.parser import HTMLParser
from xml.etree import ElementTree

from ..items import Document, HttpResponse, Item, Text, payload_text

VOID_ELEMENTS = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
}

# Opening one of these closes an open sibling of the listed kinds first.
IMPLIED_END = {
    "li": {"li"},
    "p": {"p"},
    "td": {"td", "th"},
    "th": {"td", "th"},
    "tr": {"tr", "td", "th"},
    "dt": {"dt", "dd"},
    "dd": {"dt", "dd"},
    "option": {"option"},
}


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = ElementTree.Element("html")
        self._implicit_root = True
        self.stack = [self.root]

    def handle_starttag(self, tag, attrs):
        if tag == "html" and self._implicit_root:
            self._implicit_root = False
            for key, value in attrs:
                self.root.set(key, value or "")
            return
        closes = IMPLIED_END.get(tag)
        if closes:
            while len(self.stack) > 1 and self.stack[-1].tag in closes:
                self.stack.pop()
        element = ElementTree.SubElement(self.stack[-1], tag)
        for key, value in attrs:
            element.set(key, value or "")
        if tag not in VOID_ELEMENTS:
            self.stack.append(element)

    def handle_startendtag(self, tag, attrs):
        element = ElementTree.SubElement(self.stack[-1], tag)
        for key, value in attrs:
            element.set(key, value or "")

    def handle_endtag(self, tag):
        if tag in VOID_ELEMENTS:
            return
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # stray end tag: ignore

    def handle_data(self, data):
        parent = self.stack[-1]
        if len(parent):
            last = parent[-1]
            last.tail = (last.tail or "") + data
        else:
            parent.text = (parent.text or "") + data


def parse_html(text: str) -> ElementTree.Element:
    builder = _TreeBuilder()
    builder.feed(text)
    builder.close()
    root = builder.root
    # If the soup has a single top element and no loose text, use it as root.
    if builder._implicit_root and len(root) == 1 and not (root.text or "").strip():
        only = root[0]
        if not (only.tail or "").strip():
            return only
    return root


def parse_document(item: Item, fmt: str = "html") -> list[Item]:
    """Parse an HTTP response or text into a single document item."""
    payload = item.payload
    if isinstance(payload, HttpResponse):
        content_type = payload.header("content-type").split(";")[0].strip().lower()
        if content_type and not _content_type_ok(content_type, fmt):
            return []
    elif not isinstance(payload, Text):
        return []
    text = payload_text(item)
    if text is None:
        return []

    if fmt == "xml":
        try:
            root = ElementTree.fromstring(text)
        except ElementTree.ParseError:
            return []
        return [Item(Document(root))]
    if fmt == "html":
        return [Item(Document(parse_html(text)))]
    return []


def _content_type_ok(content_type: str, fmt: str) -> bool:
    if fmt == "xml":
        return "xml" in content_type
    return "html" in content_type or "xml" in content_type or content_type.startswith("text/")
