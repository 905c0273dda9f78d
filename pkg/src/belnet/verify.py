"""Exact distributions of the extended model and empirical comparison.

The sampler realizes the chain-rule product of the extended CPT rows; that
product, enumerated exhaustively, is the reference the sample is checked
against.  The collapsed form is its push-forward under per-variable collapse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .cpt import ExtCPT, build_network_cpts
from .errors import SizeGuardError
from .extvals import component
from .network import Network, edge_index, topological_order
from .sampler import Sample, _own

MAX_STATES = 10_000_000


@dataclass
class ExactDistribution:
    """Probabilities over state vectors (declaration order keys)."""

    variables: tuple[str, ...]
    probs: dict[tuple, float] = field(default_factory=dict)

    def total(self) -> float:
        return sum(self.probs.values())

    def marginal(self, variable: str) -> dict:
        j = self.variables.index(variable)
        out: dict = {}
        for key, p in self.probs.items():
            out[key[j]] = out.get(key[j], 0.0) + p
        return out


def exact_extended_joint(
    net: Network, cpts: dict[str, ExtCPT] | None = None, max_states: int = MAX_STATES
) -> ExactDistribution:
    """Exhaustive chain-rule product over all extended states."""
    if cpts is None:
        cpts = build_network_cpts(net)
    topo = topological_order(net)
    size = 1
    for name in topo:
        size *= len(cpts[name].child_domain)
    if size > max_states:
        raise SizeGuardError(f"extended state space holds {size} states (limit {max_states})")

    variables = tuple(net.variables)
    topo_pos = {v: j for j, v in enumerate(topo)}
    decl_of = [topo_pos[v] for v in variables]
    parent_slots = {
        name: [
            (topo_pos[p], edge_index(net, p, name)) for p in cpts[name].parent_names
        ]
        for name in topo
    }
    out = ExactDistribution(variables)
    values: list = [None] * len(topo)

    def rec(j: int, acc: float) -> None:
        if j == len(topo):
            key = tuple(values[t] for t in decl_of)
            out.probs[key] = out.probs.get(key, 0.0) + acc
            return
        name = topo[j]
        cpt = cpts[name]
        cfg = tuple(component(values[t], h) for t, h in parent_slots[name])
        row = cpt.row(cfg)
        for c in np.nonzero(row)[0]:
            values[j] = cpt.child_domain[c]
            rec(j + 1, acc * float(row[c]))

    rec(0, 1.0)
    return out


def exact_collapsed_joint(
    net: Network, cpts: dict[str, ExtCPT] | None = None, max_states: int = MAX_STATES
) -> ExactDistribution:
    """Push-forward of the extended joint under per-variable collapse."""
    extended = exact_extended_joint(net, cpts, max_states)
    out = ExactDistribution(extended.variables)
    for key, p in extended.probs.items():
        ckey = tuple(_own(v) for v in key)
        out.probs[ckey] = out.probs.get(ckey, 0.0) + p
    return out


@dataclass
class ComparisonReport:
    """Empirical-vs-exact comparison over collapsed cells."""

    n: int
    linf: float
    chi2: float
    dof: int
    threshold: float | None
    cells: list[tuple[tuple, float, float]]
    impossible: list[tuple] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.threshold is None or self.linf <= self.threshold) and not self.impossible

    def __str__(self) -> str:
        lines = [
            f"records: {self.n}",
            f"cells (exact support): {self.dof + 1}",
            f"L-infinity distance: {self.linf:.9f}"
            + (f" (threshold {self.threshold:.9f})" if self.threshold is not None else ""),
            f"chi-square: {self.chi2:.6f} on {self.dof} degrees of freedom",
        ]
        for key in self.impossible:
            lines.append(f"impossible cell observed: {_key_text(key)}")
        lines.append("result: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _key_text(key: tuple) -> str:
    return "(" + ",".join(str(k) for k in key) + ")"


def compare_empirical(
    sample: Sample | Mapping[tuple, float],
    exact: ExactDistribution,
    linf_threshold: float | None = None,
) -> ComparisonReport:
    """Compare an empirical collapsed distribution against the exact one.

    ``sample`` is either a Sample or a mapping of collapsed state tuples to
    counts (weights).  The chi-square statistic is computed over the cells of
    the exact support; the pass verdict keys on the L-infinity distance.
    """
    if isinstance(sample, Sample):
        if tuple(sample.variables) != tuple(exact.variables):
            raise ValueError(
                f"sample variables {sample.variables} do not match exact scope {exact.variables}"
            )
        counts: Mapping[tuple, float] = sample.collapsed_counts()
    else:
        counts = sample
    n = sum(counts.values())
    if n <= 0:
        raise ValueError("empirical sample is empty")

    support = {k: p for k, p in exact.probs.items() if p > 0.0}
    impossible = sorted(
        (k for k, c in counts.items() if c and k not in support), key=_key_text
    )
    linf = 0.0
    chi2 = 0.0
    cells = []
    for key in sorted(set(support) | set(counts), key=_key_text):
        p = exact.probs.get(key, 0.0)
        emp = counts.get(key, 0.0) / n
        linf = max(linf, abs(emp - p))
        if key in support:
            expected = n * p
            chi2 += (counts.get(key, 0.0) - expected) ** 2 / expected
        cells.append((key, p, emp))
    return ComparisonReport(
        n=int(n),
        linf=linf,
        chi2=chi2,
        dof=len(support) - 1,
        threshold=linf_threshold,
        cells=cells,
        impossible=list(impossible),
    )
