"""Versioned prompt template registry.

Templates live beside this module as ``<id>/<version>.txt`` with a JSON
sidecar naming slots and image attachments. Body files are hash-pinned via
the sidecar: editing a body without bumping its version fails loading, so an
experiment can always be traced to the exact prompt text it ran with.

Placeholders use ``$name`` / ``${name}`` syntax, which leaves the literal
braces of ``\\boxed{}`` untouched.
"""

from __future__ import annotations

import hashlib
import json
import string
from dataclasses import dataclass
from pathlib import Path

from ..errors import (
    ImageArityMismatchError,
    MissingSlotError,
    PreconditionError,
    TemplateIntegrityError,
    UnknownTemplateError,
    UnknownVersionError,
)
from ..store import ImageRef
from ..vlm.client import ImagePart, Message, TextPart

_DATA_DIR = Path(__file__).parent


def _identifiers(body: str) -> set[str]:
    found = set()
    for m in string.Template.pattern.finditer(body):
        name = m.group("named") or m.group("braced")
        if name:
            found.add(name)
    return found


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    version: int
    body: str
    required_slots: frozenset[str]
    attachment_spec: tuple[str, ...]

    def __post_init__(self):
        extra = _identifiers(self.body) - self.required_slots
        if extra:
            raise PreconditionError(
                f"template {self.id}@{self.version} has undeclared placeholders: {sorted(extra)}"
            )


class PromptRegistry:
    def __init__(self, root: Path | None = None):
        self.root = Path(root) if root else _DATA_DIR
        self._cache: dict[tuple[str, int], PromptTemplate] = {}

    def ids(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if p.is_dir() and not p.name.startswith("_"))

    def versions(self, template_id: str) -> list[int]:
        tdir = self.root / template_id
        if not tdir.is_dir():
            raise UnknownTemplateError(f"no template {template_id!r}")
        return sorted(int(p.stem) for p in tdir.glob("*.txt"))

    def get(self, template_id: str, version: int | None = None) -> PromptTemplate:
        versions = self.versions(template_id)
        if version is None:
            version = versions[-1]
        elif version not in versions:
            raise UnknownVersionError(f"{template_id} has no version {version}")
        key = (template_id, version)
        if key not in self._cache:
            self._cache[key] = self._load(template_id, version)
        return self._cache[key]

    def _load(self, template_id: str, version: int) -> PromptTemplate:
        tdir = self.root / template_id
        body = (tdir / f"{version}.txt").read_text(encoding="utf-8")
        sidecar = json.loads((tdir / f"{version}.json").read_text(encoding="utf-8"))
        recorded = sidecar.get("sha256", "")
        actual = hashlib.sha256(body.encode("utf-8")).hexdigest()
        if recorded != actual:
            raise TemplateIntegrityError(
                f"{template_id}@{version}: body hash {actual[:12]} != recorded {recorded[:12]};"
                " edits require a new version"
            )
        return PromptTemplate(
            id=template_id,
            version=version,
            body=body,
            required_slots=frozenset(sidecar.get("required_slots", [])),
            attachment_spec=tuple(sidecar.get("attachment_spec", [])),
        )


def instantiate(template: PromptTemplate, slots: dict[str, str],
                images: list[ImageRef]) -> list[Message]:
    """Fill a template into a single user message: images first, text after."""
    missing = template.required_slots - set(slots)
    if missing:
        raise MissingSlotError(f"{template.id}: missing slots {sorted(missing)}")
    if len(images) != len(template.attachment_spec):
        raise ImageArityMismatchError(
            f"{template.id} expects {len(template.attachment_spec)} images"
            f" ({', '.join(template.attachment_spec)}), got {len(images)}"
        )
    text = string.Template(template.body).substitute(slots) if template.required_slots else template.body
    parts: list = [ImagePart(image=img) for img in images]
    parts.append(TextPart(text=text))
    return [Message(role="user", parts=tuple(parts))]


_default_registry: PromptRegistry | None = None


def default_registry() -> PromptRegistry:
    global _default_registry
    if _default_registry is None:
        _default_registry = PromptRegistry()
    return _default_registry
