"""Lenient HTML parsing into a minimal element tree."""

from __future__ import annotations

from dataclasses import dataclass, field
from html.parser import HTMLParser

VOID_ELEMENTS = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
}

# Content of these subtrees never reaches layout.
_RAW_SKIP = {"script", "template", "noscript"}


@dataclass
class TextNode:
    text: str


@dataclass
class Element:
    tag: str
    attrs: dict[str, str] = field(default_factory=dict)
    children: list = field(default_factory=list)

    def classes(self) -> set[str]:
        return set((self.attrs.get("class") or "").split())

    def iter_elements(self):
        yield self
        for child in self.children:
            if isinstance(child, Element):
                yield from child.iter_elements()


@dataclass
class Document:
    root: Element
    style_sheets: list[str]
    title: str = ""

    @property
    def body(self) -> Element:
        for el in self.root.iter_elements():
            if el.tag == "body":
                return el
        return self.root


class _TreeBuilder(HTMLParser):
    def __init__(self, tick):
        super().__init__(convert_charrefs=True)
        self.root = Element(tag="html")
        self.stack = [self.root]
        self.styles: list[str] = []
        self.title = ""
        self._raw_depth = 0
        self._in_style = False
        self._in_title = False
        self._tick = tick

    def handle_starttag(self, tag, attrs):
        self._tick()
        tag = tag.lower()
        if self._raw_depth:
            if tag in _RAW_SKIP:
                self._raw_depth += 1
            return
        if tag in _RAW_SKIP:
            self._raw_depth = 1
            return
        if tag == "style":
            self._in_style = True
            return
        if tag == "title":
            self._in_title = True
            return
        if tag == "html":
            return  # the implicit root already exists
        element = Element(tag=tag, attrs={k.lower(): (v or "") for k, v in attrs})
        self.stack[-1].children.append(element)
        if tag not in VOID_ELEMENTS:
            self.stack.append(element)

    def handle_startendtag(self, tag, attrs):
        self._tick()
        tag = tag.lower()
        if self._raw_depth or tag in _RAW_SKIP or tag in ("style", "title", "html"):
            return
        self.stack[-1].children.append(Element(tag=tag, attrs={k.lower(): (v or "") for k, v in attrs}))

    def handle_endtag(self, tag):
        self._tick()
        tag = tag.lower()
        if self._raw_depth:
            if tag in _RAW_SKIP:
                self._raw_depth -= 1
            return
        if tag == "style":
            self._in_style = False
            return
        if tag == "title":
            self._in_title = False
            return
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                break

    def handle_data(self, data):
        self._tick()
        if self._raw_depth:
            return
        if self._in_style:
            self.styles.append(data)
            return
        if self._in_title:
            self.title += data
            return
        if data:
            self.stack[-1].children.append(TextNode(text=data))


def parse_html(source: str, tick=lambda: None) -> Document:
    """Parse markup leniently; `tick` is called per token for deadline checks."""
    builder = _TreeBuilder(tick)
    builder.feed(source)
    builder.close()
    # inline style attributes living on <style>-less pages still work; sheets
    # gathered here are parsed by the css module.
    return Document(root=builder.root, style_sheets=builder.styles, title=builder.title.strip())
