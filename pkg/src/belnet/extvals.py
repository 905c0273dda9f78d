"""Extended variable domains used by the sampling construction.

An ExtValue is either a plain subset of a frame or a compound ``s o V`` /
``s @ V`` built from a proper nonempty subset ``s`` of an existing value's own
set.  Every value carries ``own`` (the subset it collapses to) and ``sup``
(the coarser value it was split from, if any).

An ExtVector is the n-successor form: either ``n`` copies of a plain subset,
or a family member that feeds each successor one compound component.  The
all-``o`` component pattern is excluded from families by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .errors import SizeGuardError, SubsetParseError
from .tables import Frame, SubsetMask, parse_subset_label, subsets_of

OP_DOT = "o"  # behaves as its superset value
OP_AT = "@"  # resolved by averaging against the superset value

MAX_FRAME = 4
MAX_SUCCESSORS = 6


@dataclass(frozen=True)
class ExtValue:
    """A plain subset or a compound split value over one frame."""

    own: SubsetMask
    op: Optional[str] = None
    sup: Optional["ExtValue"] = None

    def __post_init__(self):
        if (self.op is None) != (self.sup is None):
            raise ValueError("compound values need both an operator and a superset value")
        if self.op is not None:
            if self.op not in (OP_DOT, OP_AT):
                raise ValueError(f"unknown operator {self.op!r}")
            parent_own = self.sup.own
            if self.own.frame != parent_own.frame:
                raise ValueError("split subset and superset value use different frames")
            if not (self.own.issubset(parent_own) and self.own.bits != parent_own.bits):
                raise ValueError(f"{self.own} is not a proper nonempty subset of {parent_own}")

    @property
    def is_plain(self) -> bool:
        return self.op is None

    @property
    def frame(self) -> Frame:
        return self.own.frame

    @property
    def depth(self) -> int:
        return 0 if self.sup is None else 1 + self.sup.depth

    def __str__(self) -> str:
        if self.is_plain:
            return str(self.own)
        return f"{self.own}{self.op}{self.sup}"


@dataclass(frozen=True)
class ExtVector:
    """A vector of n ExtValue components, one per successor edge.

    ``pattern`` bit ``h-1`` selects the ``@`` component for edge ``h``;
    plain vectors have ``sup is None`` and pattern 0.
    """

    own: SubsetMask
    n: int
    sup: Optional[ExtValue] = None
    pattern: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("vectors need at least one successor edge")
        if self.sup is None:
            if self.pattern != 0:
                raise ValueError("plain vectors carry no component pattern")
        else:
            if not (1 <= self.pattern < (1 << self.n)):
                raise ValueError("family pattern must select '@' on at least one edge")
            if not (self.own.issubset(self.sup.own) and self.own.bits != self.sup.own.bits):
                raise ValueError(f"{self.own} is not a proper nonempty subset of {self.sup.own}")

    @property
    def is_plain(self) -> bool:
        return self.sup is None

    @property
    def frame(self) -> Frame:
        return self.own.frame

    def __str__(self) -> str:
        return "[" + ";".join(str(component(self, h)) for h in range(1, self.n + 1)) + "]"


def _guard_frame(frame: Frame) -> None:
    if len(frame) > MAX_FRAME:
        raise SizeGuardError(
            f"frame {frame.name!r} has {len(frame)} values; extended domains support at most {MAX_FRAME}"
        )


@lru_cache(maxsize=None)
def ext_values(frame: Frame) -> tuple[ExtValue, ...]:
    """All extended values of a frame, in canonical order.

    Plain subsets come first (canonical subset order), then compounds level by
    level: each level splits every value of the previous level, listing the
    ``o`` compounds before the ``@`` compounds.
    """
    _guard_frame(frame)
    plain = [ExtValue(s) for s in subsets_of(frame)]
    out = list(plain)
    level = plain
    while True:
        nxt = []
        for op in (OP_DOT, OP_AT):
            for v in level:
                for s in subsets_of(frame):
                    if s.issubset(v.own) and s.bits != v.own.bits:
                        nxt.append(ExtValue(s, op, v))
        if not nxt:
            return tuple(out)
        out.extend(nxt)
        level = nxt


@lru_cache(maxsize=None)
def _ext_value_pos(frame: Frame) -> dict[ExtValue, int]:
    return {v: i for i, v in enumerate(ext_values(frame))}


def ext_value_index(value: ExtValue) -> int:
    return _ext_value_pos(value.frame)[value]


@lru_cache(maxsize=None)
def ext_vectors(frame: Frame, n: int) -> tuple[ExtVector, ...]:
    """All extended vectors for a node with n successors, in canonical order.

    Plain vectors first, then families grouped by the split they refine
    (superset value, then split subset), patterns in increasing bit order.
    """
    _guard_frame(frame)
    if not 1 <= n <= MAX_SUCCESSORS:
        raise SizeGuardError(f"successor count {n} outside 1..{MAX_SUCCESSORS}")
    out = [ExtVector(s, n) for s in subsets_of(frame)]
    for sup in ext_values(frame):
        for s in subsets_of(frame):
            if s.issubset(sup.own) and s.bits != sup.own.bits:
                for pattern in range(1, 1 << n):
                    out.append(ExtVector(s, n, sup, pattern))
    return tuple(out)


def component(vec: ExtVector, h: int) -> ExtValue:
    """The ExtValue this vector contributes on successor edge h (1-based)."""
    if not 1 <= h <= vec.n:
        raise ValueError(f"edge index {h} outside 1..{vec.n}")
    if vec.is_plain:
        return ExtValue(vec.own)
    op = OP_AT if vec.pattern >> (h - 1) & 1 else OP_DOT
    return ExtValue(vec.own, op, vec.sup)


def parse_ext_value(text: str, frame: Frame) -> ExtValue:
    """Parse the canonical text form, e.g. ``{a}``, ``{a}o{a,b}``, ``{a}@{a,b}``."""
    literals, ops = _split_ops(text.strip())
    value = ExtValue(parse_subset_label(literals[-1], frame))
    for literal, op in zip(reversed(literals[:-1]), reversed(ops)):
        value = ExtValue(parse_subset_label(literal, frame), op, value)
    return value


def parse_ext_vector(text: str, frame: Frame) -> ExtVector:
    """Parse the canonical vector form ``[c1;c2;...;cn]``."""
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise SubsetParseError(f"vector literal must be bracket-delimited, got {text!r}")
    comps = [parse_ext_value(p, frame) for p in text[1:-1].split(";")]
    n = len(comps)
    first = comps[0]
    if all(c.is_plain for c in comps):
        if any(c.own != first.own for c in comps):
            raise SubsetParseError(f"plain vector components disagree in {text!r}")
        return ExtVector(first.own, n)
    if any(c.is_plain or c.own != first.own or c.sup != first.sup for c in comps):
        raise SubsetParseError(f"family components must share one split in {text!r}")
    pattern = 0
    for h, c in enumerate(comps):
        if c.op == OP_AT:
            pattern |= 1 << h
    return ExtVector(first.own, n, first.sup, pattern)


def _split_ops(text: str) -> tuple[list[str], list[str]]:
    """Split ``{..}op{..}op{..}`` into its subset literals and joining operators."""
    literals: list[str] = []
    ops: list[str] = []
    rest = text
    while True:
        if not rest.startswith("{"):
            raise SubsetParseError(f"expected subset literal in {text!r}")
        end = rest.find("}")
        if end < 0:
            raise SubsetParseError(f"unbalanced braces in {text!r}")
        literals.append(rest[: end + 1])
        rest = rest[end + 1 :]
        if not rest:
            return literals, ops
        op, rest = rest[0], rest[1:]
        if op not in (OP_DOT, OP_AT):
            raise SubsetParseError(f"unknown operator {op!r} in {text!r}")
        ops.append(op)
