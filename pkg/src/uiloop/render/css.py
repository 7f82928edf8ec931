"""CSS subset: parsing, matching, cascade, and computed styles.

Supported surface, chosen to cover the bulk of single-document generated
pages: tag/class/id/universal/attribute selectors (rightmost compound of a
combinator chain), inline style attributes, specificity plus source order,
!important, inheritance of text properties, px/em/rem/% lengths, hex/rgb()/
named colors, margin/padding/border shorthands, box-sizing, and the display
values none/block/inline/inline-block (flex and grid degrade to block).
Pseudo-classes and pseudo-elements never apply to a static screenshot, so
rules carrying them are dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .dom import Element

RGBA = tuple[int, int, int, int]

NAMED_COLORS: dict[str, RGBA] = {
    "black": (0, 0, 0, 255), "silver": (192, 192, 192, 255), "gray": (128, 128, 128, 255),
    "grey": (128, 128, 128, 255), "white": (255, 255, 255, 255), "maroon": (128, 0, 0, 255),
    "red": (255, 0, 0, 255), "purple": (128, 0, 128, 255), "fuchsia": (255, 0, 255, 255),
    "green": (0, 128, 0, 255), "lime": (0, 255, 0, 255), "olive": (128, 128, 0, 255),
    "yellow": (255, 255, 0, 255), "navy": (0, 0, 128, 255), "blue": (0, 0, 255, 255),
    "teal": (0, 128, 128, 255), "aqua": (0, 255, 255, 255), "orange": (255, 165, 0, 255),
    "aliceblue": (240, 248, 255, 255), "beige": (245, 245, 220, 255), "brown": (165, 42, 42, 255),
    "coral": (255, 127, 80, 255), "cornflowerblue": (100, 149, 237, 255),
    "crimson": (220, 20, 60, 255), "cyan": (0, 255, 255, 255), "darkblue": (0, 0, 139, 255),
    "darkgray": (169, 169, 169, 255), "darkgreen": (0, 100, 0, 255), "darkgrey": (169, 169, 169, 255),
    "darkorange": (255, 140, 0, 255), "darkred": (139, 0, 0, 255), "darkslategray": (47, 79, 79, 255),
    "darkviolet": (148, 0, 211, 255), "deeppink": (255, 20, 147, 255),
    "deepskyblue": (0, 191, 255, 255), "dimgray": (105, 105, 105, 255), "dodgerblue": (30, 144, 255, 255),
    "firebrick": (178, 34, 34, 255), "forestgreen": (34, 139, 34, 255), "gainsboro": (220, 220, 220, 255),
    "gold": (255, 215, 0, 255), "goldenrod": (218, 165, 32, 255), "hotpink": (255, 105, 180, 255),
    "indigo": (75, 0, 130, 255), "ivory": (255, 255, 240, 255), "khaki": (240, 230, 140, 255),
    "lavender": (230, 230, 250, 255), "lightblue": (173, 216, 230, 255),
    "lightcoral": (240, 128, 128, 255), "lightgray": (211, 211, 211, 255),
    "lightgreen": (144, 238, 144, 255), "lightgrey": (211, 211, 211, 255),
    "lightpink": (255, 182, 193, 255), "lightsalmon": (255, 160, 122, 255),
    "lightseagreen": (32, 178, 170, 255), "lightskyblue": (135, 206, 250, 255),
    "lightyellow": (255, 255, 224, 255), "limegreen": (50, 205, 50, 255),
    "magenta": (255, 0, 255, 255), "mediumblue": (0, 0, 205, 255), "mediumseagreen": (60, 179, 113, 255),
    "midnightblue": (25, 25, 112, 255), "mintcream": (245, 255, 250, 255),
    "navajowhite": (255, 222, 173, 255), "olivedrab": (107, 142, 35, 255),
    "orangered": (255, 69, 0, 255), "orchid": (218, 112, 214, 255), "palegreen": (152, 251, 152, 255),
    "peachpuff": (255, 218, 185, 255), "peru": (205, 133, 63, 255), "pink": (255, 192, 203, 255),
    "plum": (221, 160, 221, 255), "powderblue": (176, 224, 230, 255), "rebeccapurple": (102, 51, 153, 255),
    "rosybrown": (188, 143, 143, 255), "royalblue": (65, 105, 225, 255), "salmon": (250, 128, 114, 255),
    "sandybrown": (244, 164, 96, 255), "seagreen": (46, 139, 87, 255), "seashell": (255, 245, 238, 255),
    "sienna": (160, 82, 45, 255), "skyblue": (135, 206, 235, 255), "slateblue": (106, 90, 205, 255),
    "slategray": (112, 128, 144, 255), "snow": (255, 250, 250, 255), "springgreen": (0, 255, 127, 255),
    "steelblue": (70, 130, 180, 255), "tan": (210, 180, 140, 255), "thistle": (216, 191, 216, 255),
    "tomato": (255, 99, 71, 255), "turquoise": (64, 224, 208, 255), "violet": (238, 130, 238, 255),
    "wheat": (245, 222, 179, 255), "whitesmoke": (245, 245, 245, 255),
    "yellowgreen": (154, 205, 50, 255), "transparent": (0, 0, 0, 0),
}

_HEX3 = re.compile(r"^#([0-9a-f])([0-9a-f])([0-9a-f])$")
_HEX6 = re.compile(r"^#([0-9a-f]{2})([0-9a-f]{2})([0-9a-f]{2})$")
_HEX8 = re.compile(r"^#([0-9a-f]{2})([0-9a-f]{2})([0-9a-f]{2})([0-9a-f]{2})$")
_RGB_FN = re.compile(r"^rgba?\(([^)]*)\)$")


def parse_color(value: str) -> Optional[RGBA]:
    v = value.strip().lower()
    if v in NAMED_COLORS:
        return NAMED_COLORS[v]
    m = _HEX3.match(v)
    if m:
        r, g, b = (int(c * 2, 16) for c in m.groups())
        return (r, g, b, 255)
    m = _HEX6.match(v)
    if m:
        r, g, b = (int(c, 16) for c in m.groups())
        return (r, g, b, 255)
    m = _HEX8.match(v)
    if m:
        r, g, b, a = (int(c, 16) for c in m.groups())
        return (r, g, b, a)
    m = _RGB_FN.match(v)
    if m:
        parts = [p.strip() for p in re.split(r"[,/]", m.group(1)) if p.strip()]
        if len(parts) < 3:
            return None
        try:
            rgb = []
            for p in parts[:3]:
                if p.endswith("%"):
                    rgb.append(int(round(float(p[:-1]) * 2.55)))
                else:
                    rgb.append(int(round(float(p))))
            alpha = 255
            if len(parts) >= 4:
                a = parts[3]
                alpha = int(round(float(a[:-1]) * 2.55)) if a.endswith("%") else int(round(float(a) * 255))
            r, g, b = (max(0, min(255, c)) for c in rgb)
            return (r, g, b, max(0, min(255, alpha)))
        except ValueError:
            return None
    return None


@dataclass(frozen=True)
class Length:
    value: float
    unit: str  # px | em | rem | % | auto

    def resolve(self, *, font_size: float, container: float, root_font: float = 16.0) -> float:
        if self.unit == "px":
            return self.value
        if self.unit == "em":
            return self.value * font_size
        if self.unit == "rem":
            return self.value * root_font
        if self.unit == "%":
            return self.value * container / 100.0
        return 0.0


AUTO = Length(0.0, "auto")

_LENGTH = re.compile(r"^(-?\d*\.?\d+)(px|em|rem|%|pt|vh|vw)?$")


def parse_length(value: str) -> Optional[Length]:
    v = value.strip().lower()
    if v == "auto":
        return AUTO
    if v == "0":
        return Length(0.0, "px")
    m = _LENGTH.match(v)
    if not m:
        return None
    num = float(m.group(1))
    unit = m.group(2) or "px"
    if unit == "pt":
        return Length(num * 4 / 3, "px")
    if unit in ("vh", "vw"):
        return Length(num, "%")  # approximated against the container
    return Length(num, unit)


# --- selectors ---------------------------------------------------------------

@dataclass(frozen=True)
class SimpleSelector:
    tag: Optional[str]
    id: Optional[str]
    classes: frozenset[str]
    attrs: tuple[tuple[str, Optional[str]], ...]  # (name, value-or-None)

    def matches(self, element: Element) -> bool:
        if self.tag and self.tag != element.tag:
            return False
        if self.id and element.attrs.get("id") != self.id:
            return False
        if self.classes and not self.classes <= element.classes():
            return False
        for name, expected in self.attrs:
            if name not in element.attrs:
                return False
            if expected is not None and element.attrs[name] != expected:
                return False
        return True

    def specificity(self) -> tuple[int, int, int]:
        return (
            1 if self.id else 0,
            len(self.classes) + len(self.attrs),
            1 if self.tag else 0,
        )


_COMPOUND = re.compile(r"([a-zA-Z][\w-]*|\*)?((?:[#.][\w-]+|\[[^\]]*\])*)$")
_PIECE = re.compile(r"[#.][\w-]+|\[[^\]]*\]")


def parse_selector(selector: str) -> Optional[SimpleSelector]:
    """Parse the rightmost compound of a selector chain; None = unsupported."""
    sel = selector.strip()
    if not sel or "::" in sel:
        return None
    sel = sel.replace(">", " ").replace("+", " ").replace("~", " ")
    compound = sel.split()[-1]
    if compound == ":root":
        compound = "html"
    if ":" in compound:
        return None  # pseudo-classes never fire in a static capture
    m = _COMPOUND.match(compound)
    if not m or (not m.group(1) and not m.group(2)):
        return None
    tag = m.group(1)
    tag = None if tag in (None, "*", "") else tag.lower()
    sel_id = None
    classes: set[str] = set()
    attrs: list[tuple[str, Optional[str]]] = []
    for piece in _PIECE.findall(m.group(2) or ""):
        if piece.startswith("#"):
            sel_id = piece[1:]
        elif piece.startswith("."):
            classes.add(piece[1:])
        else:
            inner = piece[1:-1].strip()
            if "=" in inner:
                name, value = inner.split("=", 1)
                attrs.append((name.strip().lower(), value.strip().strip("\"'")))
            else:
                attrs.append((inner.lower(), None))
    return SimpleSelector(tag=tag, id=sel_id, classes=frozenset(classes), attrs=tuple(attrs))


@dataclass
class Rule:
    selector: SimpleSelector
    declarations: dict[str, str]
    important: set[str]
    order: int


_COMMENT = re.compile(r"/\*.*?\*/", re.DOTALL)


def parse_declarations(block: str) -> tuple[dict[str, str], set[str]]:
    decls: dict[str, str] = {}
    important: set[str] = set()
    for piece in block.split(";"):
        if ":" not in piece:
            continue
        prop, value = piece.split(":", 1)
        prop = prop.strip().lower()
        value = value.strip()
        if not prop or not value:
            continue
        if value.lower().endswith("!important"):
            value = value[: -len("!important")].rstrip().rstrip("!").rstrip()
            important.add(prop)
        decls[prop] = value
    return decls, important


def parse_stylesheet(text: str, first_order: int = 0) -> list[Rule]:
    text = _COMMENT.sub(" ", text)
    rules: list[Rule] = []
    order = first_order
    i = 0
    n = len(text)
    while i < n:
        brace = text.find("{", i)
        if brace == -1:
            break
        header = text[i:brace].strip()
        if header.startswith("@"):
            # skip at-rules entirely, including nested blocks
            depth = 1
            j = brace + 1
            while j < n and depth:
                if text[j] == "{":
                    depth += 1
                elif text[j] == "}":
                    depth -= 1
                j += 1
            i = j
            continue
        close = text.find("}", brace)
        if close == -1:
            break
        body = text[brace + 1:close]
        decls, important = parse_declarations(body)
        if decls:
            for raw_sel in header.split(","):
                selector = parse_selector(raw_sel)
                if selector is not None:
                    rules.append(Rule(selector=selector, declarations=decls,
                                      important=important, order=order))
                    order += 1
        i = close + 1
    return rules


# --- computed style -----------------------------------------------------------

_INHERITED = {"color", "font-size", "font-weight", "font-style", "text-align",
              "line-height", "font-family", "text-transform"}

_BLOCK_TAGS = {
    "html", "body", "div", "p", "h1", "h2", "h3", "h4", "h5", "h6", "ul", "ol",
    "li", "header", "footer", "section", "article", "nav", "aside", "main",
    "form", "table", "thead", "tbody", "tr", "fieldset", "pre", "blockquote",
    "hr", "figure", "figcaption", "dl", "dt", "dd", "address",
}

_DEFAULT_DECLS: dict[str, dict[str, str]] = {
    "body": {"margin": "8px"},
    "h1": {"font-size": "2em", "font-weight": "bold", "margin": "0.67em 0"},
    "h2": {"font-size": "1.5em", "font-weight": "bold", "margin": "0.83em 0"},
    "h3": {"font-size": "1.17em", "font-weight": "bold", "margin": "1em 0"},
    "h4": {"font-size": "1em", "font-weight": "bold", "margin": "1.33em 0"},
    "h5": {"font-size": "0.83em", "font-weight": "bold", "margin": "1.67em 0"},
    "h6": {"font-size": "0.67em", "font-weight": "bold", "margin": "2.33em 0"},
    "p": {"margin": "1em 0"},
    "ul": {"margin": "1em 0", "padding-left": "40px"},
    "ol": {"margin": "1em 0", "padding-left": "40px"},
    "pre": {"margin": "1em 0"},
    "blockquote": {"margin": "1em 40px"},
    "a": {"color": "#0000ee"},
    "b": {"font-weight": "bold"},
    "strong": {"font-weight": "bold"},
    "i": {"font-style": "italic"},
    "em": {"font-style": "italic"},
    "hr": {"margin": "8px 0", "height": "1px", "background-color": "#808080"},
    "button": {"padding": "4px 10px", "background-color": "#efefef", "border": "1px solid #767676"},
    "input": {"padding": "2px 4px", "border": "1px solid #767676"},
    "textarea": {"padding": "2px 4px", "border": "1px solid #767676"},
    "th": {"font-weight": "bold"},
}

_SIDES = ("top", "right", "bottom", "left")


@dataclass
class ComputedStyle:
    display: str = "block"
    color: RGBA = (0, 0, 0, 255)
    background: Optional[RGBA] = None
    font_size: float = 16.0
    bold: bool = False
    italic: bool = False
    text_align: str = "left"
    line_height: float = 1.25
    width: Length = AUTO
    height: Length = AUTO
    box_sizing: str = "content-box"
    margin: dict[str, Length] = field(default_factory=lambda: {s: Length(0, "px") for s in _SIDES})
    padding: dict[str, Length] = field(default_factory=lambda: {s: Length(0, "px") for s in _SIDES})
    border_width: dict[str, float] = field(default_factory=lambda: {s: 0.0 for s in _SIDES})
    border_color: RGBA = (0, 0, 0, 255)


def _expand_shorthand(value: str) -> Optional[list[str]]:
    parts = value.split()
    if not parts or len(parts) > 4:
        return None
    if len(parts) == 1:
        parts = parts * 4
    elif len(parts) == 2:
        parts = [parts[0], parts[1], parts[0], parts[1]]
    elif len(parts) == 3:
        parts = [parts[0], parts[1], parts[2], parts[1]]
    return parts  # top right bottom left


def _parse_border(value: str) -> tuple[Optional[float], Optional[RGBA]]:
    width: Optional[float] = None
    color: Optional[RGBA] = None
    for token in value.split():
        t = token.strip().lower()
        if t == "none":
            return 0.0, None
        length = parse_length(t)
        if length is not None and length.unit == "px":
            width = length.value
            continue
        if t in ("thin", "medium", "thick"):
            width = {"thin": 1.0, "medium": 3.0, "thick": 5.0}[t]
            continue
        c = parse_color(t)
        if c is not None:
            color = c
    if width is None and ("solid" in value or "dashed" in value or "dotted" in value):
        width = 3.0  # medium initial width
    return width, color


class StyleResolver:
    def __init__(self, rules: list[Rule]):
        self.rules = rules

    def declarations_for(self, element: Element) -> dict[str, str]:
        collected: list[tuple[tuple, dict[str, str], set[str]]] = []
        defaults = _DEFAULT_DECLS.get(element.tag)
        if defaults:
            collected.append(((0, 0, 0, 0, -1), dict(defaults), set()))
        for rule in self.rules:
            if rule.selector.matches(element):
                spec = rule.selector.specificity()
                collected.append(((0,) + spec + (rule.order,), rule.declarations, rule.important))
        inline = element.attrs.get("style")
        if inline:
            decls, important = parse_declarations(inline)
            collected.append(((1, 0, 0, 0, 10**9), decls, important))
        # two passes: normal declarations by ascending priority, then !important
        merged: dict[str, str] = {}
        for key, decls, _ in sorted(collected, key=lambda it: it[0]):
            merged.update(decls)
        for key, decls, important in sorted(collected, key=lambda it: it[0]):
            for prop in important:
                if prop in decls:
                    merged[prop] = decls[prop]
        return merged

    def compute(self, element: Element, parent: Optional[ComputedStyle],
                root_font: float = 16.0) -> ComputedStyle:
        style = ComputedStyle()
        if parent is not None:
            style.color = parent.color
            style.font_size = parent.font_size
            style.bold = parent.bold
            style.italic = parent.italic
            style.text_align = parent.text_align
            style.line_height = parent.line_height
        style.display = "block" if element.tag in _BLOCK_TAGS else "inline"

        decls = self.declarations_for(element)
        parent_font = parent.font_size if parent else 16.0

        fs = decls.get("font-size")
        if fs:
            length = parse_length(fs)
            if length is not None and length.unit != "auto":
                style.font_size = max(1.0, length.resolve(font_size=parent_font,
                                                          container=parent_font, root_font=root_font))

        for prop, value in decls.items():
            v = value.strip()
            lower = v.lower()
            if prop == "display":
                if lower == "none":
                    style.display = "none"
                elif lower in ("inline",):
                    style.display = "inline"
                elif lower in ("inline-block", "inline-flex"):
                    style.display = "inline-block"
                else:
                    style.display = "block"  # block/flex/grid/list-item degrade to block
            elif prop == "color":
                c = parse_color(lower)
                if c:
                    style.color = c
            elif prop in ("background", "background-color"):
                c = parse_color(_background_color_token(lower))
                if c is not None:
                    style.background = c
            elif prop == "font-weight":
                if lower in ("bold", "bolder"):
                    style.bold = True
                elif lower in ("normal", "lighter"):
                    style.bold = False
                else:
                    try:
                        style.bold = float(lower) >= 600
                    except ValueError:
                        pass
            elif prop == "font-style":
                style.italic = lower in ("italic", "oblique")
            elif prop == "text-align":
                if lower in ("left", "right", "center", "justify"):
                    style.text_align = "left" if lower == "justify" else lower
            elif prop == "line-height":
                try:
                    style.line_height = float(lower)
                except ValueError:
                    length = parse_length(lower)
                    if length is not None and length.unit in ("px", "em", "rem"):
                        resolved = length.resolve(font_size=style.font_size, container=0, root_font=root_font)
                        if style.font_size:
                            style.line_height = resolved / style.font_size
            elif prop == "width":
                length = parse_length(lower)
                if length is not None:
                    style.width = length
            elif prop in ("height", "min-height"):
                length = parse_length(lower)
                if length is not None and length.unit != "auto":
                    style.height = length
            elif prop == "box-sizing":
                if lower in ("border-box", "content-box"):
                    style.box_sizing = lower
            elif prop == "margin":
                sides = _expand_shorthand(v)
                if sides:
                    for side, sv in zip(_SIDES, sides):
                        length = parse_length(sv)
                        if length is not None:
                            style.margin[side] = length
            elif prop.startswith("margin-") and prop[7:] in _SIDES:
                length = parse_length(lower)
                if length is not None:
                    style.margin[prop[7:]] = length
            elif prop == "padding":
                sides = _expand_shorthand(v)
                if sides:
                    for side, sv in zip(_SIDES, sides):
                        length = parse_length(sv)
                        if length is not None and length.unit != "auto":
                            style.padding[side] = length
            elif prop.startswith("padding-") and prop[8:] in _SIDES:
                length = parse_length(lower)
                if length is not None and length.unit != "auto":
                    style.padding[prop[8:]] = length
            elif prop == "border":
                width, color = _parse_border(lower)
                if width is not None:
                    style.border_width = {s: width for s in _SIDES}
                if color is not None:
                    style.border_color = color
            elif prop in ("border-top", "border-right", "border-bottom", "border-left"):
                width, color = _parse_border(lower)
                side = prop.split("-", 1)[1]
                if width is not None:
                    style.border_width[side] = width
                if color is not None:
                    style.border_color = color
            elif prop == "border-width":
                sides = _expand_shorthand(v)
                if sides:
                    for side, sv in zip(_SIDES, sides):
                        length = parse_length(sv)
                        if length is not None and length.unit == "px":
                            style.border_width[side] = length.value
            elif prop == "border-color":
                c = parse_color(lower)
                if c:
                    style.border_color = c

        return style


def _background_color_token(value: str) -> str:
    # `background` shorthand: take the first token that parses as a color
    for token in re.split(r"\s+", value):
        if parse_color(token) is not None:
            return token
    return value
