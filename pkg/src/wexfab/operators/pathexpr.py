"""A small path-expression language over element trees.

Supported grammar, by example:

    //a/@href      any descendant `a`, yielding its href attribute
    /r/item        children named item under a root named r
    //table/tr     tr children of any table
    //p/text()     the text content of every p

Only the child and descendant axes, name or `*` node tests, and a trailing
`@attr` or `text()` terminal exist; anything richer is out of scope here.
"""

from __future__ import annotations

from dataclasses import dataclass
from xml.etree import ElementTree


class PathSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class Step:
    axis: str  # "child" | "descendant"
    test: str  # tag name or "*"


@dataclass(frozen=True)
class PathExpression:
    steps: tuple[Step, ...]
    terminal: tuple[str, str] | None = None  # ("attribute", name) | ("text", "")

    @classmethod
    def parse(cls, text: str) -> "PathExpression":
        raw = text.strip()
        if not raw:
            raise PathSyntaxError("empty path expression")
        tokens = _split_path(raw)
        steps: list[Step] = []
        terminal: tuple[str, str] | None = None
        for i, (axis, test) in enumerate(tokens):
            last = i == len(tokens) - 1
            if test.startswith("@"):
                if not last:
                    raise PathSyntaxError(f"attribute step must be last: {text!r}")
                if axis != "child":
                    raise PathSyntaxError(f"attribute step cannot follow '//': {text!r}")
                terminal = ("attribute", test[1:])
            elif test == "text()":
                if not last:
                    raise PathSyntaxError(f"text() must be last: {text!r}")
                terminal = ("text", "")
            else:
                if not test:
                    raise PathSyntaxError(f"empty step in {text!r}")
                steps.append(Step(axis, test))
        if not steps and terminal is None:
            raise PathSyntaxError(f"no steps in {text!r}")
        return cls(tuple(steps), terminal)

    def select(self, root: ElementTree.Element) -> list[ElementTree.Element]:
        """Matching elements in document order, without duplicates."""
        order = {id(elem): i for i, elem in enumerate(root.iter())}
        current = [root]
        virtual_root = True
        for step in self.steps:
            gathered: list[ElementTree.Element] = []
            for node in current:
                if step.axis == "descendant":
                    candidates = list(node.iter())
                    if not (virtual_root and node is root):
                        candidates = candidates[1:]  # descendant axis excludes self
                elif virtual_root and node is root:
                    candidates = [root]  # the document's only child is the root
                else:
                    candidates = list(node)
                for candidate in candidates:
                    if step.test in ("*", candidate.tag):
                        gathered.append(candidate)
            seen: set[int] = set()
            current = []
            for elem in sorted(gathered, key=lambda e: order[id(e)]):
                if id(elem) not in seen:
                    seen.add(id(elem))
                    current.append(elem)
            virtual_root = False
        return current

    def values(self, root: ElementTree.Element) -> list[str] | None:
        """Terminal values per matched node; None when there is no terminal."""
        if self.terminal is None:
            return None
        nodes = self.select(root)
        out: list[str] = []
        kind, name = self.terminal
        for node in nodes:
            if kind == "attribute":
                if name in node.attrib:
                    out.append(node.attrib[name])
            else:
                text = "".join(node.itertext())
                if text:
                    out.append(text)
        return out


def _split_path(raw: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    i = 0
    axis = "child"
    if raw.startswith("//"):
        axis, i = "descendant", 2
    elif raw.startswith("/"):
        i = 1
    buf = ""
    while i <= len(raw):
        ch = raw[i] if i < len(raw) else "/"
        if ch == "/":
            tokens.append((axis, buf))
            buf = ""
            if raw[i:i + 2] == "//":
                axis, i = "descendant", i + 2
            else:
                axis, i = "child", i + 1
            if i > len(raw):
                break
        else:
            buf += ch
            i += 1
    return [t for t in tokens if t[1] != "" or len(tokens) == 1]
