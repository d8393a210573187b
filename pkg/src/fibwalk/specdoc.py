"""Walk specification files.

A spec file is a JSON object::

    {"name": "fixture", "p": [0.5, 0.5, 0.5, 0], "q": [0, 0.5, 0.5, 0.5],
     "r": [0, 0, 0, 0], "s": [0.5, 0, 0, 0.5], "start": 0}

``p``, ``q``, ``r`` and ``s`` are required; ``name``, ``start``,
``ghost_left`` and ``ghost_right`` are optional.  Numbers must be plain
decimal literals: strings, booleans, ``NaN`` and ``Infinity`` are rejected.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

from .errors import SpecValidationError
from .walkmodel import WalkSpec, validate

LISTS = ("p", "q", "r", "s")
KEYS = ("name",) + LISTS + ("start", "ghost_left", "ghost_right")


class SpecFormatError(SpecValidationError):
    """The spec file cannot be read as a spec document."""

    def __init__(self, message, key=None):
        super().__init__(message, [(None, key or "document", message)])
        self.key = key


@dataclass(frozen=True)
class SpecDocument:
    p: Tuple[float, ...]
    q: Tuple[float, ...]
    r: Tuple[float, ...]
    s: Tuple[float, ...]
    name: Optional[str] = None
    start: Optional[int] = None
    ghost_left: float = 1.0
    ghost_right: float = 1.0

    def to_spec(self) -> WalkSpec:
        """The validated :class:`WalkSpec` this document describes."""
        return validate(WalkSpec(self.p, self.q, self.r, self.s, self.ghost_left,
                                 self.ghost_right, self.start or 0))

    @classmethod
    def from_spec(cls, spec: WalkSpec, name: Optional[str] = None) -> "SpecDocument":
        return cls(spec.p, spec.q, spec.r, spec.s, name, spec.start, spec.ghost_left, spec.ghost_right)


def _reject_constant(token):
    raise SpecFormatError(f"non-finite number {token} is not allowed")


def _number(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecFormatError(f"{key}: expected a number, got {json.dumps(value)}", key)
    return float(value)


def parse_spec(source: Union[str, os.PathLike]) -> SpecDocument:
    """Parse a spec document from JSON text or from a path to a file.

    A string whose first non-blank character is ``{`` is taken as text.
    """
    if isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    else:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise SpecFormatError(f"cannot read spec file: {exc}") from None
    try:
        raw = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"malformed spec at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise SpecFormatError("spec document must be an object")

    unknown = [k for k in raw if k not in KEYS]
    if unknown:
        raise SpecFormatError(f"unknown key {unknown[0]!r}", unknown[0])
    missing = [k for k in LISTS if k not in raw]
    if missing:
        raise SpecFormatError(f"missing key {missing[0]!r}", missing[0])

    lists = {}
    for key in LISTS:
        values = raw[key]
        if not isinstance(values, list) or not values:
            raise SpecFormatError(f"{key}: expected a non-empty list of numbers", key)
        lists[key] = tuple(_number(v, f"{key}[{i}]") for i, v in enumerate(values))
    expected = len(lists["p"])
    for key in LISTS[1:]:
        if len(lists[key]) != expected:
            raise SpecFormatError(f"length mismatch: {key!r} has {len(lists[key])} entries, p has {expected}", key)

    name = raw.get("name")
    if name is not None and not isinstance(name, str):
        raise SpecFormatError("name: expected a string", "name")
    start = raw.get("start")
    if start is not None and (isinstance(start, bool) or not isinstance(start, int)):
        raise SpecFormatError("start: expected an integer", "start")
    ghosts = {k: _number(raw[k], k) for k in ("ghost_left", "ghost_right") if k in raw}
    return SpecDocument(name=name, start=start, **lists, **ghosts)


def serialize(doc: SpecDocument) -> str:
    """JSON text that :func:`parse_spec` reads back to an equal document."""
    out = {}
    if doc.name is not None:
        out["name"] = doc.name
    for key in LISTS:
        out[key] = list(getattr(doc, key))
    if doc.start is not None:
        out["start"] = doc.start
    out["ghost_left"] = doc.ghost_left
    out["ghost_right"] = doc.ghost_right
    return json.dumps(out, indent=2) + "\n"
