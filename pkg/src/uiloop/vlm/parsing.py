"""Parsers for structured model output: think/answer tags and boxed verdicts."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import MalformedTagsError, NoBoxedContentError, UnbalancedBracesError

_STRICT_TAGGED = re.compile(r"^<think>(.*)</think><answer>(.*)</answer>$", re.DOTALL)


@dataclass(frozen=True)
class StructuredAnswer:
    think: str
    answer: str

    def as_tagged(self) -> str:
        return f"<think>{self.think}</think><answer>{self.answer}</answer>"


def _check_tag_closure(raw: str, tag: str) -> None:
    opens = raw.count(f"<{tag}>")
    closes = raw.count(f"</{tag}>")
    if opens > closes:
        raise MalformedTagsError(f"<{tag}> opened without matching </{tag}>")


def extract_answer(raw: str) -> StructuredAnswer:
    """Split think/answer tagged output, falling back leniently for bare text.

    A fully tagged source round-trips byte-exactly through as_tagged().
    An opening tag with no closing tag is a hard parse error; untagged text
    becomes the answer with an empty think section.
    """
    m = _STRICT_TAGGED.match(raw)
    if m:
        return StructuredAnswer(think=m.group(1), answer=m.group(2))

    _check_tag_closure(raw, "think")
    _check_tag_closure(raw, "answer")

    think = ""
    tm = re.search(r"<think>(.*?)</think>", raw, re.DOTALL)
    if tm:
        think = tm.group(1)
    am = re.search(r"<answer>(.*?)</answer>", raw, re.DOTALL)
    if am:
        return StructuredAnswer(think=think, answer=am.group(1))
    if tm:
        # Tagged reasoning but untagged remainder: everything after </think>.
        return StructuredAnswer(think=think, answer=raw[tm.end():])
    return StructuredAnswer(think="", answer=raw)


def extract_boxed(raw: str) -> str:
    r"""Return the contents of the last balanced ``\boxed{...}`` span.

    Judges often restate the required format before answering; the final
    boxed span is the authoritative verdict.
    """
    marker = r"\boxed{"
    starts = [m.start() for m in re.finditer(re.escape(marker), raw)]
    if not starts:
        raise NoBoxedContentError("no \\boxed{...} span present")
    for start in reversed(starts):
        depth = 0
        body_start = start + len(marker)
        for i in range(body_start, len(raw)):
            ch = raw[i]
            if ch == "{":
                depth += 1
            elif ch == "}":
                if depth == 0:
                    return raw[body_start:i]
                depth -= 1
        # this occurrence never closes; try an earlier one
    raise UnbalancedBracesError("\\boxed{ opened but never balanced")
