"""Deterministic pure-Python HTML rasterizer.

A self-contained rendering engine used when no pinned browser binary is
available: block layout with inline text wrapping over the css module's
property subset, painted with Pillow's bundled font. Identical (document,
viewport, engine build) inputs produce identical PNG bytes, which is the
property every downstream hash comparison relies on.

Deliberate subset boundaries: no JavaScript execution, no floats or
positioned-overlap stacking, inline-level boxes other than text lay out as
blocks, and external resources are never fetched (an `img` paints as a
neutral placeholder). Page-level problems surface as Failure values:
exceeding the render deadline maps to `timeout`, an internal engine fault to
`protocol-error`.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass, field
from typing import Optional

from PIL import Image, ImageDraw, ImageFont

from ..store import BlobStore, HtmlDocument
from .base import DEFAULT_PAGE_HEIGHT_CAP_PX, RenderFailureReason, RenderResult, Viewport
from .css import AUTO, ComputedStyle, RGBA, StyleResolver, parse_length, parse_stylesheet
from .dom import Document, Element, TextNode, parse_html


class _DeadlineExceeded(Exception):
    pass


class _Deadline:
    def __init__(self, timeout_s: float):
        self.expires = time.monotonic() + timeout_s
        self._count = 0

    def tick(self, every: int = 64) -> None:
        self._count += 1
        if self._count % every == 0 and time.monotonic() > self.expires:
            raise _DeadlineExceeded()

    def check(self) -> None:
        if time.monotonic() > self.expires:
            raise _DeadlineExceeded()


@dataclass
class _TextFrag:
    text: str
    style: ComputedStyle


@dataclass
class _Line:
    y: float
    height: float
    words: list[tuple[float, str, ComputedStyle]] = field(default_factory=list)  # (x, word, style)
    width: float = 0.0


@dataclass
class _Box:
    style: ComputedStyle
    x: float = 0.0
    y: float = 0.0
    width: float = 0.0   # border-box width
    height: float = 0.0  # border-box height
    children: list["_Box"] = field(default_factory=list)
    lines: list[_Line] = field(default_factory=list)


class _FontCache:
    def __init__(self):
        self._fonts: dict[int, ImageFont.FreeTypeFont] = {}

    def get(self, size_px: float) -> ImageFont.FreeTypeFont:
        key = max(6, int(round(size_px)))
        if key not in self._fonts:
            self._fonts[key] = ImageFont.load_default(size=key)
        return self._fonts[key]

    def width(self, text: str, style: ComputedStyle) -> float:
        return self.get(style.font_size).getlength(text)


def _collapse_ws(text: str) -> str:
    return " ".join(text.split())


class BuiltinEngine:
    """Renders documents without a browser; see module docstring for scope."""

    def __init__(self, store: BlobStore, page_height_cap_px: int = DEFAULT_PAGE_HEIGHT_CAP_PX):
        self.store = store
        self.page_height_cap_px = page_height_cap_px
        self.fonts = _FontCache()

    def render_once(self, doc: HtmlDocument, viewport: Viewport, timeout_s: float) -> RenderResult:
        deadline = _Deadline(timeout_s)
        try:
            document = parse_html(doc.source, tick=deadline.tick)
            rules = []
            for sheet in document.style_sheets:
                rules.extend(parse_stylesheet(sheet, first_order=len(rules)))
                deadline.check()
            resolver = StyleResolver(rules)
            body = document.body
            body_style = resolver.compute(body, None)
            root_box = self._layout(body, resolver, None, viewport.width_px, 0.0, 0.0, deadline)
            content_height = max(root_box.height + root_box.y, 1.0)
            png = self._paint(root_box, body_style, viewport, content_height, deadline)
            image = self.store.put_image(png)
            return RenderResult.success(image, page_height_px=image.height_px // viewport.device_scale)
        except _DeadlineExceeded:
            return RenderResult.failed(RenderFailureReason.TIMEOUT)
        except Exception:
            return RenderResult.failed(RenderFailureReason.PROTOCOL_ERROR)

    def close(self) -> None:
        pass

    # -- layout ---------------------------------------------------------------

    def _layout(self, element: Element, resolver: StyleResolver,
                parent_style: Optional[ComputedStyle], containing_width: float,
                x: float, y: float, deadline: _Deadline) -> _Box:
        deadline.tick()
        style = resolver.compute(element, parent_style)
        box = _Box(style=style)

        margin = {s: style.margin[s].resolve(font_size=style.font_size, container=containing_width)
                  for s in ("top", "right", "bottom", "left")}
        padding = {s: style.padding[s].resolve(font_size=style.font_size, container=containing_width)
                   for s in ("top", "right", "bottom", "left")}
        border = style.border_width

        available = containing_width - margin["left"] - margin["right"]
        if style.width is not AUTO and style.width.unit != "auto":
            specified = style.width.resolve(font_size=style.font_size, container=containing_width)
            if style.box_sizing == "border-box":
                border_box_w = specified
            else:
                border_box_w = specified + padding["left"] + padding["right"] + border["left"] + border["right"]
            border_box_w = max(border_box_w, 1.0)
            # honor `margin: 0 auto` centering for fixed-width blocks
            if style.margin["left"].unit == "auto" and style.margin["right"].unit == "auto":
                slack = max(0.0, available - border_box_w)
                margin["left"] += slack / 2
                margin["right"] += slack / 2
        else:
            border_box_w = max(available, 1.0)

        box.x = x + margin["left"]
        box.y = y + margin["top"]
        box.width = border_box_w

        inner_x = box.x + border["left"] + padding["left"]
        inner_w = max(1.0, border_box_w - padding["left"] - padding["right"] - border["left"] - border["right"])
        cursor = box.y + border["top"] + padding["top"]

        pending: list[_TextFrag] = []

        def flush_text():
            nonlocal cursor
            if not pending:
                return
            lines = self._layout_text(pending, inner_x, cursor, inner_w, style, deadline)
            if lines:
                box.lines.extend(lines)
                cursor = lines[-1].y + lines[-1].height
            pending.clear()

        for child in element.children:
            deadline.tick()
            if isinstance(child, TextNode):
                text = _collapse_ws(child.text)
                if text:
                    pending.append(_TextFrag(text=text, style=style))
                continue
            if child.tag == "br":
                flush_text()
                cursor += style.font_size * style.line_height
                continue
            child_style = resolver.compute(child, style)
            if child_style.display == "none":
                continue
            if child.tag == "img":
                flush_text()
                img_box = self._image_placeholder(child, child_style, inner_x, cursor, inner_w)
                box.children.append(img_box)
                cursor = img_box.y + img_box.height
                continue
            if child_style.display == "inline" and not _has_block_descendant(child, resolver, child_style):
                pending.extend(self._inline_frags(child, resolver, child_style))
                continue
            flush_text()
            child_box = self._layout(child, resolver, style, inner_w, inner_x, cursor, deadline)
            box.children.append(child_box)
            child_margin_bottom = child_style.margin["bottom"].resolve(
                font_size=child_style.font_size, container=inner_w)
            cursor = child_box.y + child_box.height + child_margin_bottom
        flush_text()

        content_height = max(cursor - (box.y + border["top"] + padding["top"]), 0.0)
        if style.height is not AUTO and style.height.unit != "auto":
            specified_h = style.height.resolve(font_size=style.font_size, container=content_height or 1.0)
            if style.box_sizing == "border-box":
                box.height = max(specified_h, 0.0)
            else:
                box.height = specified_h + padding["top"] + padding["bottom"] + border["top"] + border["bottom"]
        else:
            box.height = content_height + padding["top"] + padding["bottom"] + border["top"] + border["bottom"]
        return box

    def _image_placeholder(self, element: Element, style: ComputedStyle,
                           x: float, y: float, containing_width: float) -> _Box:
        # external fetches are blocked; images paint as a neutral block
        width = _dimension_attr(element, "width") or 0.0
        height = _dimension_attr(element, "height") or 0.0
        if style.width is not AUTO and style.width.unit != "auto":
            width = style.width.resolve(font_size=style.font_size, container=containing_width)
        if style.height is not AUTO and style.height.unit != "auto":
            height = style.height.resolve(font_size=style.font_size, container=containing_width)
        width = min(width or 120.0, containing_width)
        height = height or width * 0.75
        placeholder = ComputedStyle()
        placeholder.background = (204, 204, 204, 255)
        placeholder.border_width = {s: 1.0 for s in ("top", "right", "bottom", "left")}
        placeholder.border_color = (160, 160, 160, 255)
        return _Box(style=placeholder, x=x, y=y, width=width, height=height)

    def _inline_frags(self, element: Element, resolver: StyleResolver,
                      style: ComputedStyle) -> list[_TextFrag]:
        frags: list[_TextFrag] = []
        for child in element.children:
            if isinstance(child, TextNode):
                text = _collapse_ws(child.text)
                if text:
                    frags.append(_TextFrag(text=text, style=style))
            elif isinstance(child, Element):
                child_style = resolver.compute(child, style)
                if child_style.display != "none":
                    frags.extend(self._inline_frags(child, resolver, child_style))
        return frags

    def _layout_text(self, frags: list[_TextFrag], x: float, y: float, width: float,
                     container_style: ComputedStyle, deadline: _Deadline) -> list[_Line]:
        words: list[tuple[str, ComputedStyle]] = []
        for frag in frags:
            for word in frag.text.split(" "):
                if word:
                    words.append((word, frag.style))
        if not words:
            return []
        lines: list[_Line] = []
        line_height = max(s.font_size * s.line_height for _, s in words)
        current = _Line(y=y, height=line_height)
        cursor = 0.0
        for word, style in words:
            deadline.tick()
            word_w = self.fonts.width(word, style)
            space_w = self.fonts.width(" ", style) if current.words else 0.0
            if current.words and cursor + space_w + word_w > width:
                current.width = cursor
                lines.append(current)
                current = _Line(y=current.y + current.height, height=line_height)
                cursor = 0.0
                space_w = 0.0
            current.words.append((cursor + space_w, word, style))
            cursor += space_w + word_w
        current.width = cursor
        lines.append(current)
        align = container_style.text_align
        for line in lines:
            shift = 0.0
            if align == "center":
                shift = max(0.0, (width - line.width) / 2)
            elif align == "right":
                shift = max(0.0, width - line.width)
            line.words = [(x + wx + shift, word, style) for wx, word, style in line.words]
        return lines

    # -- paint ------------------------------------------------------------------

    def _paint(self, root: _Box, body_style: ComputedStyle, viewport: Viewport,
               content_height: float, deadline: _Deadline) -> bytes:
        scale = viewport.device_scale
        if viewport.height_px:
            page_h = viewport.height_px
        else:
            page_h = int(min(max(content_height, 1.0), self.page_height_cap_px))
        page_h = max(page_h, 1)
        canvas_bg = body_style.background or (255, 255, 255, 255)
        img = Image.new("RGB", (viewport.width_px * scale, page_h * scale), canvas_bg[:3])
        draw = ImageDraw.Draw(img, "RGBA")
        self._paint_box(draw, root, scale, deadline)
        buf = io.BytesIO()
        img.save(buf, format="PNG", optimize=False)
        return buf.getvalue()

    def _paint_box(self, draw: ImageDraw.ImageDraw, box: _Box, scale: int,
                   deadline: _Deadline) -> None:
        deadline.tick()
        x0, y0 = box.x * scale, box.y * scale
        x1, y1 = (box.x + box.width) * scale, (box.y + box.height) * scale
        if box.style.background is not None and box.style.background[3] > 0:
            draw.rectangle([x0, y0, max(x0, x1 - 1), max(y0, y1 - 1)], fill=box.style.background)
        bw = box.style.border_width
        if any(bw[s] > 0 for s in bw):
            color = box.style.border_color
            if bw["top"]:
                draw.rectangle([x0, y0, x1 - 1, y0 + bw["top"] * scale - 1], fill=color)
            if bw["bottom"]:
                draw.rectangle([x0, y1 - bw["bottom"] * scale, x1 - 1, y1 - 1], fill=color)
            if bw["left"]:
                draw.rectangle([x0, y0, x0 + bw["left"] * scale - 1, y1 - 1], fill=color)
            if bw["right"]:
                draw.rectangle([x1 - bw["right"] * scale, y0, x1 - 1, y1 - 1], fill=color)
        for line in box.lines:
            for wx, word, style in line.words:
                deadline.tick()
                font = self.fonts.get(style.font_size * scale)
                baseline_pad = (line.height - style.font_size) / 2
                draw.text((wx * scale, (line.y + baseline_pad) * scale), word,
                          fill=style.color, font=font,
                          stroke_width=1 if style.bold else 0,
                          stroke_fill=style.color if style.bold else None)
        for child in box.children:
            self._paint_box(draw, child, scale, deadline)


def _dimension_attr(element: Element, name: str) -> float:
    raw = element.attrs.get(name, "").strip().rstrip("px")
    try:
        return max(float(raw), 0.0)
    except ValueError:
        return 0.0


def _has_block_descendant(element: Element, resolver: StyleResolver,
                          style: ComputedStyle) -> bool:
    for child in element.children:
        if isinstance(child, Element):
            child_style = resolver.compute(child, style)
            if child_style.display not in ("inline", "none"):
                return True
            if _has_block_descendant(child, resolver, child_style):
                return True
    return False
