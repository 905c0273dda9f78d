"""Frames, subset masks, conditional tables, and the mass <-> commonality transforms.

A conditional table maps (parent configuration of subsets, child subset) to a
real number.  Mass tables may carry negative values; commonality tables are the
superset-cumulated form whose rows are probability distributions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping

import numpy as np

from .errors import InfeasibleModelError, SubsetParseError

# Tolerance ladder: algebraic identities / computed row sums / 6-digit inputs.
EXACT_TOL = 1e-12
ROWSUM_TOL = 1e-9
REPORT_TOL = 1e-6
# Row-sum convention on mass tables is a heuristic check only; inputs are
# often rounded to 6 significant digits, so it gets a looser tolerance.
CONVENTION_TOL = 1e-5


@dataclass(frozen=True)
class Frame:
    """An ordered set of values of one variable."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError(f"frame {self.name!r} needs at least one value")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"frame {self.name!r} has duplicate value labels")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def full_bits(self) -> int:
        return (1 << len(self.values)) - 1


@dataclass(frozen=True)
class SubsetMask:
    """A nonempty subset of one frame's values, stored as membership bits."""

    frame: Frame
    bits: int

    def __post_init__(self):
        if not 0 < self.bits <= self.frame.full_bits:
            raise ValueError(f"invalid subset bits {self.bits:#x} for frame {self.frame.name!r}")

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    @property
    def is_full(self) -> bool:
        return self.bits == self.frame.full_bits

    def labels(self) -> tuple[str, ...]:
        return tuple(v for i, v in enumerate(self.frame.values) if self.bits >> i & 1)

    def issubset(self, other: "SubsetMask") -> bool:
        return self.bits & other.bits == self.bits

    def __str__(self) -> str:
        return "{" + ",".join(self.labels()) + "}"


@lru_cache(maxsize=None)
def subsets_of(frame: Frame) -> tuple[SubsetMask, ...]:
    """All nonempty subsets in canonical order: by size, then by lowest members."""
    masks = sorted(range(1, frame.full_bits + 1), key=lambda b: (b.bit_count(), b))
    return tuple(SubsetMask(frame, b) for b in masks)


@lru_cache(maxsize=None)
def _subset_pos(frame: Frame) -> dict[int, int]:
    return {s.bits: i for i, s in enumerate(subsets_of(frame))}


def full_set(frame: Frame) -> SubsetMask:
    return SubsetMask(frame, frame.full_bits)


def parse_subset_label(text: str, frame: Frame) -> SubsetMask:
    """Parse a literal like ``{a,b}`` against a frame.

    Rejects unknown labels, duplicates, and empty braces.
    """
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise SubsetParseError(f"subset literal must be brace-delimited, got {text!r}")
    inner = text[1:-1].strip()
    if not inner:
        raise SubsetParseError(f"empty subset literal {text!r}")
    bits = 0
    for label in (p.strip() for p in inner.split(",")):
        try:
            i = frame.values.index(label)
        except ValueError:
            raise SubsetParseError(
                f"unknown label {label!r} for frame {frame.name!r} (values: {', '.join(frame.values)})"
            ) from None
        if bits >> i & 1:
            raise SubsetParseError(f"duplicate label {label!r} in {text!r}")
        bits |= 1 << i
    return SubsetMask(frame, bits)


@dataclass(frozen=True)
class ProductFocal:
    """A product-form focal element: one subset per in-scope variable."""

    masks: tuple[SubsetMask, ...]

    @property
    def frames(self) -> tuple[Frame, ...]:
        return tuple(m.frame for m in self.masks)

    def project(self, positions: tuple[int, ...]) -> "ProductFocal":
        return ProductFocal(tuple(self.masks[i] for i in positions))

    def __str__(self) -> str:
        return "(" + ",".join(str(m) for m in self.masks) + ")"


class _CondTable:
    """Dense conditional table over product configurations.

    Rows are indexed by the mixed-radix encoding of the parent configuration
    (last parent varies fastest); columns follow the child's canonical subset
    order.  Instances are immutable after construction.
    """

    kind = "?"

    def __init__(self, child_frame: Frame, parent_frames: tuple[Frame, ...], values: np.ndarray):
        self.child_frame = child_frame
        self.parent_frames = tuple(parent_frames)
        self._dims = tuple(len(subsets_of(f)) for f in self.parent_frames)
        rows = int(np.prod(self._dims)) if self._dims else 1
        ncols = len(subsets_of(child_frame))
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (rows, ncols):
            raise ValueError(f"table shape {values.shape} != expected ({rows}, {ncols})")
        if not np.all(np.isfinite(values)):
            raise ValueError("table contains non-finite values")
        values = values.copy()
        values.setflags(write=False)
        self.values = values

    @classmethod
    def from_entries(
        cls,
        child_frame: Frame,
        parent_frames: tuple[Frame, ...],
        entries: Mapping[tuple[tuple[SubsetMask, ...], SubsetMask], float],
    ):
        """Build from a sparse mapping; absent pairs default to zero."""
        dims = tuple(len(subsets_of(f)) for f in parent_frames)
        rows = int(np.prod(dims)) if dims else 1
        vals = np.zeros((rows, len(subsets_of(child_frame))))
        for (cfg, child), v in entries.items():
            vals[_config_index(parent_frames, cfg), _subset_pos(child_frame)[child.bits]] = v
        return cls(child_frame, parent_frames, vals)

    @property
    def row_count(self) -> int:
        return self.values.shape[0]

    def configs(self) -> Iterator[tuple[SubsetMask, ...]]:
        """Parent configurations in row order."""
        if not self.parent_frames:
            yield ()
            return
        yield from itertools.product(*(subsets_of(f) for f in self.parent_frames))

    def row(self, cfg: tuple[SubsetMask, ...]) -> np.ndarray:
        return self.values[_config_index(self.parent_frames, cfg)]

    def get(self, cfg: tuple[SubsetMask, ...], child: SubsetMask) -> float:
        return float(self.row(cfg)[_subset_pos(self.child_frame)[child.bits]])

    def items(self) -> Iterator[tuple[tuple[SubsetMask, ...], SubsetMask, float]]:
        children = subsets_of(self.child_frame)
        for r, cfg in enumerate(self.configs()):
            for c, child in enumerate(children):
                yield cfg, child, float(self.values[r, c])


def _config_index(parent_frames: tuple[Frame, ...], cfg: tuple[SubsetMask, ...]) -> int:
    if len(cfg) != len(parent_frames):
        raise ValueError(f"configuration arity {len(cfg)} != parent count {len(parent_frames)}")
    idx = 0
    for frame, mask in zip(parent_frames, cfg):
        if mask.frame != frame:
            raise ValueError(f"configuration subset {mask} does not belong to frame {frame.name!r}")
        idx = idx * len(subsets_of(frame)) + _subset_pos(frame)[mask.bits]
    return idx


class CondMassTable(_CondTable):
    """Conditional mass table; values may be negative."""

    kind = "m"


class CondCommonalityTable(_CondTable):
    """Superset-cumulated conditional table; rows are probability distributions."""

    kind = "k"


@lru_cache(maxsize=None)
def _superset_matrix(frame: Frame) -> np.ndarray:
    """M[i, j] = 1 when subset i contains subset j (canonical order)."""
    subs = subsets_of(frame)
    n = len(subs)
    m = np.zeros((n, n))
    for i, a in enumerate(subs):
        for j, b in enumerate(subs):
            if b.bits & a.bits == b.bits:
                m[i, j] = 1.0
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def _inversion_matrix(frame: Frame) -> np.ndarray:
    """Signed inverse of the superset accumulation along one coordinate."""
    subs = subsets_of(frame)
    n = len(subs)
    m = np.zeros((n, n))
    for i, a in enumerate(subs):
        for j, b in enumerate(subs):
            if b.bits & a.bits == b.bits:
                m[i, j] = float((-1) ** (a.size - b.size))
    m.setflags(write=False)
    return m


def _apply_parent_axes(table: _CondTable, mat_of: "callable") -> np.ndarray:
    dims = table._dims + (len(subsets_of(table.child_frame)),)
    t = table.values.reshape(dims)
    for axis, frame in enumerate(table.parent_frames):
        m = mat_of(frame)
        t = np.moveaxis(np.tensordot(m, t, axes=([0], [axis])), 0, axis)
    return t.reshape(table.values.shape)


def mass_to_commonality(m: CondMassTable) -> CondCommonalityTable:
    """Cumulate conditional mass over coarser (superset) parent configurations.

    The result is nonnegative with unit row sums for well-formed inputs.
    Values in [-EXACT_TOL, 0] are clamped to zero; anything lower raises
    InfeasibleModelError (the input has no such representation).
    """
    vals = _apply_parent_axes(m, _superset_matrix)
    low = vals.min() if vals.size else 0.0
    if low < -EXACT_TOL:
        r, c = np.unravel_index(int(vals.argmin()), vals.shape)
        cfg = _nth_config(m, int(r))
        child = subsets_of(m.child_frame)[int(c)]
        raise InfeasibleModelError(
            f"negative commonality value {low:.6g} at "
            f"({','.join(str(x) for x in cfg)} ; {child}) for child {m.child_frame.name!r}"
        )
    vals = np.clip(vals, 0.0, None)
    return CondCommonalityTable(m.child_frame, m.parent_frames, vals)


def commonality_to_mass(k: CondCommonalityTable) -> CondMassTable:
    """Exact inverse of mass_to_commonality (signed superset sums per parent axis)."""
    return CondMassTable(k.child_frame, k.parent_frames, _apply_parent_axes(k, _inversion_matrix))


def _nth_config(table: _CondTable, r: int) -> tuple[SubsetMask, ...]:
    cfg = []
    for frame, d in zip(reversed(table.parent_frames), reversed(table._dims)):
        cfg.append(subsets_of(frame)[r % d])
        r //= d
    return tuple(reversed(cfg))


@dataclass
class ValidationReport:
    """Violations (errors) and advisories (warnings) found by a check."""

    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def extend(self, other: "ValidationReport") -> None:
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)

    def __str__(self) -> str:
        lines = [f"error: {e}" for e in self.errors] + [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines) if lines else "ok"


def validate_table(t: _CondTable) -> ValidationReport:
    """Check table-level numeric contracts.

    Commonality tables must be nonnegative with rows summing to one.  Mass
    tables are only checked against the observed convention that child masses
    sum to one when every conditioning coordinate is the full set and to zero
    otherwise; deviations are warnings, not errors.
    """
    report = ValidationReport()
    sums = t.values.sum(axis=1)
    if t.kind == "k":
        for r, cfg in enumerate(t.configs()):
            if abs(sums[r] - 1.0) > REPORT_TOL:
                report.errors.append(
                    f"{t.child_frame.name}: row {_fmt_cfg(cfg)} sums to {sums[r]:.9f}, expected 1"
                )
        if t.values.min(initial=0.0) < -EXACT_TOL:
            for cfg, child, v in t.items():
                if v < -EXACT_TOL:
                    report.errors.append(
                        f"{t.child_frame.name}: negative value {v:.6g} at ({_fmt_cfg(cfg)} ; {child})"
                    )
    else:
        for r, cfg in enumerate(t.configs()):
            want = 1.0 if all(c.is_full for c in cfg) else 0.0
            if abs(sums[r] - want) > CONVENTION_TOL:
                report.warnings.append(
                    f"{t.child_frame.name}: mass row {_fmt_cfg(cfg)} sums to {sums[r]:.9f}, "
                    f"convention expects {want:g}"
                )
    return report


def _fmt_cfg(cfg: tuple[SubsetMask, ...]) -> str:
    return ",".join(str(c) for c in cfg) if cfg else "()"
