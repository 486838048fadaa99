"""Tolerant parsing of structured replies from chat models.

Models are asked to reply with a JSON object but routinely wrap it in
prose, code fences, or slightly broken syntax. ``parse_structured`` works
through a fixed ladder of strategies (direct parse, balanced-block
extraction, lenient repair) and validates the result against a shallow
schema before handing it back.
"""
from __future__ import annotations

import json
import re
from typing import Any, Dict, Optional


class ParseFailure(ValueError):
    """Raised when no parsing strategy yields a value matching the schema."""


_FENCE_RE = re.compile(r"```(?:json)?\s*([\s\S]*?)\s*```")
_TRAILING_COMMA_RE = re.compile(r",\s*([}\]])")
_UNQUOTED_KEY_RE = re.compile(r"([{,]\s*)([A-Za-z_][A-Za-z0-9_]*)(\s*:)")
_SINGLE_QUOTED_KEY_RE = re.compile(r"([{,]\s*)'([^']*)'(\s*:)")
_SINGLE_QUOTED_VALUE_RE = re.compile(r":\s*'([^']*)'")


def first_balanced_block(text: str) -> Optional[str]:
    """Return the first balanced ``{...}`` block, tracking quoted strings."""
    start = text.find("{")
    if start < 0:
        return None
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return None


def repair_json(text: str) -> str:
    """Fix the malformations models emit most: trailing commas, single
    quotes, unquoted keys."""
    text = _TRAILING_COMMA_RE.sub(r"\1", text)
    text = _SINGLE_QUOTED_KEY_RE.sub(r'\1"\2"\3', text)
    text = _UNQUOTED_KEY_RE.sub(r'\1"\2"\3', text)
    text = _SINGLE_QUOTED_VALUE_RE.sub(r': "\1"', text)
    return text


def _coerce(value: Any, expected: type) -> Any:
    if expected is int:
        if isinstance(value, bool):
            raise ParseFailure(f"expected int, got bool {value!r}")
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if isinstance(value, str) and re.fullmatch(r"-?\d+", value.strip()):
            return int(value.strip())
        raise ParseFailure(f"expected int, got {value!r}")
    if expected is float:
        if isinstance(value, bool):
            raise ParseFailure(f"expected number, got bool {value!r}")
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, str):
            try:
                return float(value.strip())
            except ValueError:
                pass
        raise ParseFailure(f"expected number, got {value!r}")
    if expected is str:
        if isinstance(value, str):
            return value
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return str(value)
        raise ParseFailure(f"expected string, got {value!r}")
    if not isinstance(value, expected):
        raise ParseFailure(f"expected {expected.__name__}, got {value!r}")
    return value


def validate_shape(value: Any, schema: Dict[str, type]) -> Dict[str, Any]:
    """Check required keys and coerce leniently typed values in place."""
    if not isinstance(value, dict):
        raise ParseFailure(f"expected a JSON object, got {type(value).__name__}")
    out = dict(value)
    for key, expected in schema.items():
        if key not in out:
            raise ParseFailure(f"missing required key {key!r}")
        out[key] = _coerce(out[key], expected)
    return out


def parse_structured(raw: str, schema: Optional[Dict[str, type]] = None) -> Any:
    """Parse a model reply into a structured value.

    Tries, in order: a direct JSON parse, the first balanced ``{...}``
    block (fenced or inline), and a lenient repair pass over both. The
    first candidate that parses and satisfies ``schema`` wins.

    Raises ParseFailure when every strategy fails; the caller decides
    whether that degrades the stage or aborts.
    """
    if raw is None or not raw.strip():
        raise ParseFailure("empty reply")
    text = raw.strip()

    candidates = [text]
    fence = _FENCE_RE.search(text)
    if fence:
        candidates.append(fence.group(1))
    for base in list(candidates):
        block = first_balanced_block(base)
        if block and block not in candidates:
            candidates.append(block)
    for base in list(candidates):
        repaired = repair_json(base)
        if repaired not in candidates:
            candidates.append(repaired)
            block = first_balanced_block(repaired)
            if block and block not in candidates:
                candidates.append(block)

    last_error: Optional[Exception] = None
    for candidate in candidates:
        try:
            value = json.loads(candidate)
        except json.JSONDecodeError as exc:
            last_error = exc
            continue
        if schema is None:
            return value
        try:
            return validate_shape(value, schema)
        except ParseFailure as exc:
            last_error = exc
    raise ParseFailure(f"no parse strategy succeeded: {last_error}")
