"""Unnormalized conjunctive combination of product-form focal elements.

Composing a root table with conditional tables this way yields the exact
joint mass function of a network; the result may carry negative values,
which is precisely what the sampling construction works around.  Mass that
lands on an empty intersection is tracked separately and never redistributed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO, Sequence

from .errors import SizeGuardError
from .network import Network, topological_order
from .tables import (
    EXACT_TOL,
    REPORT_TOL,
    CondCommonalityTable,
    CondMassTable,
    Frame,
    ProductFocal,
    SubsetMask,
    commonality_to_mass,
)

MAX_SCOPE = 6
MAX_PAIRS = 10_000_000


@dataclass
class JointMass:
    """A joint mass function over a fixed variable scope.

    ``entries`` maps per-variable subset-bit tuples to mass; ``empty_mass``
    accumulates anything that hit an empty intersection.
    """

    frames: tuple[Frame, ...]
    entries: dict[tuple[int, ...], float] = field(default_factory=dict)
    empty_mass: float = 0.0

    @property
    def scope(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.frames)

    @classmethod
    def vacuous(cls, frames: Sequence[Frame]) -> "JointMass":
        frames = tuple(frames)
        return cls(frames, {tuple(f.full_bits for f in frames): 1.0})

    def total(self) -> float:
        return sum(self.entries.values()) + self.empty_mass

    def focal(self, bits: tuple[int, ...]) -> ProductFocal:
        return ProductFocal(tuple(SubsetMask(f, b) for f, b in zip(self.frames, bits)))

    def get(self, masks: Sequence[SubsetMask]) -> float:
        return self.entries.get(tuple(m.bits for m in masks), 0.0)

    def items(self):
        for bits, v in self.entries.items():
            yield self.focal(bits), v


def cylindrical_extension(
    table: CondMassTable | CondCommonalityTable, frames: Sequence[Frame]
) -> JointMass:
    """Extend a conditional table to a wider scope with full sets elsewhere."""
    frames = tuple(frames)
    names = [f.name for f in frames]
    positions = {}
    for f in table.parent_frames + (table.child_frame,):
        if f.name not in names:
            raise ValueError(f"scope is missing table variable {f.name!r}")
        positions[f.name] = names.index(f.name)
    out = JointMass(frames)
    base = [f.full_bits for f in frames]
    for cfg, child, v in table.items():
        bits = list(base)
        for mask in cfg + (child,):
            bits[positions[mask.frame.name]] = mask.bits
        key = tuple(bits)
        out.entries[key] = out.entries.get(key, 0.0) + v
    return out


def conjunctive_combine(p: JointMass, q: JointMass) -> JointMass:
    """Pairwise coordinatewise intersection with multiplied masses, no renormalization."""
    if p.scope != q.scope:
        raise ValueError(f"scope mismatch: {p.scope} vs {q.scope}")
    if len(p.entries) * len(q.entries) >= MAX_PAIRS:
        raise SizeGuardError(
            f"{len(p.entries)} x {len(q.entries)} focal pairs exceed the {MAX_PAIRS} guard"
        )
    out = JointMass(p.frames)
    empty = p.empty_mass * q.total() + q.empty_mass * sum(p.entries.values())
    entries = out.entries
    for fa, va in p.entries.items():
        for fb, vb in q.entries.items():
            inter = tuple(a & b for a, b in zip(fa, fb))
            if 0 in inter:
                empty += va * vb
            else:
                entries[inter] = entries.get(inter, 0.0) + va * vb
    out.empty_mass = empty
    return out


@dataclass
class NegativityReport:
    """Entries of a joint mass function below tolerance, plus bookkeeping totals."""

    negatives: list[tuple[ProductFocal, float]]
    min_entry: float
    total_nonempty: float
    empty_mass: float
    warnings: list[str] = field(default_factory=list)

    @property
    def proper(self) -> bool:
        return not self.negatives

    def __str__(self) -> str:
        lines = [
            f"focal elements below -{EXACT_TOL:g}: {len(self.negatives)}",
            f"minimum entry: {self.min_entry:.9f}",
            f"total nonempty mass: {self.total_nonempty:.9f}",
            f"empty-intersection mass: {self.empty_mass:.9f}",
        ]
        lines += [f"  {focal} : {v:.9f}" for focal, v in self.negatives]
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines)


def network_joint(net: Network) -> tuple[JointMass, NegativityReport]:
    """Fold all node tables (extended to full scope) in topological order."""
    names = list(net.variables)
    if len(names) > MAX_SCOPE:
        raise SizeGuardError(f"joint computation supports at most {MAX_SCOPE} variables")
    for name in names:
        if not 2 <= len(net.frame(name)) <= 4:
            raise SizeGuardError(f"variable {name!r} needs 2..4 values for the joint oracle")
    frames = tuple(net.frame(n) for n in names)
    joint = JointMass.vacuous(frames)
    for name in topological_order(net):
        table = net.node(name).table
        if isinstance(table, CondCommonalityTable):
            table = commonality_to_mass(table)
        joint = conjunctive_combine(joint, cylindrical_extension(table, frames))
    negatives = [
        (joint.focal(bits), v)
        for bits, v in sorted(joint.entries.items())
        if v < -EXACT_TOL
    ]
    total = sum(joint.entries.values())
    report = NegativityReport(
        negatives=negatives,
        min_entry=min(joint.entries.values(), default=0.0),
        total_nonempty=total,
        empty_mass=joint.empty_mass,
    )
    if abs(total - 1.0) > REPORT_TOL:
        report.warnings.append(f"nonempty mass sums to {total:.9f}, expected 1")
    return joint, report


def write_joint_csv(joint: JointMass, stream: IO[str]) -> None:
    """One row per focal element, sorted by the canonical subset literals."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(list(joint.scope) + ["mass"])
    rows = []
    for bits, v in joint.entries.items():
        literals = tuple(str(SubsetMask(f, b)) for f, b in zip(joint.frames, bits))
        rows.append((literals, v))
    rows.sort(key=lambda r: r[0])
    for literals, v in rows:
        writer.writerow(list(literals) + [f"{v:.9f}"])
