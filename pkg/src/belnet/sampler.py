"""Forward (ancestral) sampling over extended domains, collapse, CSV output.

Randomness is fully determined by a single integer seed: a counter-based
generator produces one uniform variate per record per node, and each record
consumes only its own row of variates, so output is identical no matter how
records are batched or parallelized.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .cpt import ExtCPT, build_network_cpts
from .tables import SubsetMask, subsets_of
from .extvals import component, ext_value_index
from .kernels import active_backend, draw_records
from .network import Network, edge_index, topological_order

_CHUNK = 1 << 18


@dataclass(frozen=True)
class SampleRecord:
    """One drawn record: the extended value and its collapsed subset per variable."""

    variables: tuple[str, ...]
    extended: tuple
    collapsed: tuple[SubsetMask, ...]


def collapse(record: SampleRecord) -> tuple[SubsetMask, ...]:
    """Replace each extended value by the subset it stands for."""
    return record.collapsed


class _CompiledModel:
    """Flattened integer/float arrays consumed by the drawing kernels."""

    def __init__(self, net: Network, cpts: dict[str, ExtCPT]):
        self.topo = topological_order(net)
        pos = {name: j for j, name in enumerate(self.topo)}
        self.domains = [cpts[name].child_domain for name in self.topo]

        cdf_parts, clamp_parts, comp_parts = [], [], []
        cdf_off, row_off, comp_off = [], [], []
        dom_size, n_succ = [], []
        slot_node, slot_h, slot_stride, slot_start = [], [], [], [0]
        for name in self.topo:
            cpt = cpts[name]
            node = net.node(name)
            probs = cpt.probs
            cdf_off.append(sum(len(p) for p in cdf_parts))
            row_off.append(sum(len(p) for p in clamp_parts))
            comp_off.append(sum(len(p) for p in comp_parts))
            dom_size.append(probs.shape[1])
            cdf_parts.append(np.cumsum(probs, axis=1).ravel())
            clamp_parts.append(
                np.where(probs > 0.0, np.arange(probs.shape[1]), -1).max(axis=1)
            )
            ns = len(node.successors)
            n_succ.append(ns)
            if ns:
                comp = np.empty(len(cpt.child_domain) * ns, dtype=np.int64)
                for i, x in enumerate(cpt.child_domain):
                    for h in range(1, ns + 1):
                        comp[i * ns + (h - 1)] = ext_value_index(component(x, h))
                comp_parts.append(comp)
            strides = []
            acc = 1
            for domain in reversed(cpt.parent_domains):
                strides.append(acc)
                acc *= len(domain)
            strides.reverse()
            for parent, stride in zip(cpt.parent_names, strides):
                slot_node.append(pos[parent])
                slot_h.append(edge_index(net, parent, name) - 1)
                slot_stride.append(stride)
            slot_start.append(len(slot_node))

        as_i64 = lambda xs: np.asarray(xs, dtype=np.int64)
        self.cdf_flat = np.concatenate(cdf_parts) if cdf_parts else np.zeros(0)
        self.clamp_flat = as_i64(np.concatenate(clamp_parts))
        self.comp_flat = (
            as_i64(np.concatenate(comp_parts)) if comp_parts else np.zeros(0, dtype=np.int64)
        )
        self.cdf_off = as_i64(cdf_off)
        self.row_off = as_i64(row_off)
        self.comp_off = as_i64(comp_off)
        self.dom_size = as_i64(dom_size)
        self.n_succ = as_i64(n_succ)
        self.slot_node = as_i64(slot_node)
        self.slot_h = as_i64(slot_h)
        self.slot_stride = as_i64(slot_stride)
        self.slot_start = as_i64(slot_start)


class Sample(Sequence[SampleRecord]):
    """A drawn sample; indexable as SampleRecord objects.

    ``codes`` holds the per-variable child-domain indices (records x variables,
    declaration order).
    """

    def __init__(self, variables: tuple[str, ...], domains: list, codes: np.ndarray):
        self.variables = variables
        self.domains = domains
        self.codes = codes
        self._collapse_maps = [
            np.array([str(_own(v)) for v in domain]) for domain in domains
        ]

    def __len__(self) -> int:
        return self.codes.shape[0]

    def __getitem__(self, i) -> SampleRecord:
        if isinstance(i, slice):
            raise TypeError("slicing a sample is not supported")
        row = self.codes[i]
        extended = tuple(domain[c] for domain, c in zip(self.domains, row))
        return SampleRecord(self.variables, extended, tuple(_own(v) for v in extended))

    def __iter__(self) -> Iterator[SampleRecord]:
        return (self[i] for i in range(len(self)))

    def collapsed_counts(self) -> dict[tuple[SubsetMask, ...], int]:
        """Counts of collapsed records, keyed by per-variable subsets."""
        coded = np.stack(
            [m[self.codes[:, j]] for j, m in enumerate(self._own_index_maps())], axis=1
        )
        uniq, counts = np.unique(coded, axis=0, return_counts=True)
        out = {}
        for row, cnt in zip(uniq, counts):
            key = tuple(
                _subsets_cache(self.domains[j])[row[j]] for j in range(len(self.variables))
            )
            out[key] = int(cnt)
        return out

    def marginal_counts(self, variable: str) -> dict[SubsetMask, int]:
        j = self.variables.index(variable)
        subs = _subsets_cache(self.domains[j])
        m = self._own_index_maps()[j]
        counts = np.bincount(m[self.codes[:, j]], minlength=len(subs))
        return {subs[i]: int(c) for i, c in enumerate(counts) if c}

    def _own_index_maps(self) -> list[np.ndarray]:
        maps = []
        for domain in self.domains:
            subs = _subsets_cache(domain)
            pos = {s.bits: i for i, s in enumerate(subs)}
            maps.append(np.array([pos[_own(v).bits] for v in domain], dtype=np.int64))
        return maps


def _own(value) -> SubsetMask:
    return value if isinstance(value, SubsetMask) else value.own


def _subsets_cache(domain) -> tuple[SubsetMask, ...]:
    return subsets_of(_own(domain[0]).frame)


def generate(
    net: Network,
    count: int,
    seed: int = 0,
    cpts: dict[str, ExtCPT] | None = None,
    backend: str | None = None,
) -> Sample:
    """Draw ``count`` i.i.d. records from the extended model of ``net``.

    Identical (net, count, seed) always produce identical output; the backend
    only selects the execution path.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if cpts is None:
        cpts = build_network_cpts(net)
    model = _CompiledModel(net, cpts)
    chosen = active_backend(backend)
    k = len(model.topo)
    out = np.empty((count, k), dtype=np.int64)
    rng = np.random.Generator(np.random.Philox(seed))
    lo = 0
    while lo < count:
        hi = min(lo + _CHUNK, count)
        u = rng.random((hi - lo, k))
        draw_records(u, out[lo:hi], model, chosen)
        lo = hi
    variables = tuple(net.variables)
    perm = [model.topo.index(v) for v in variables]
    codes = np.ascontiguousarray(out[:, perm])
    domains = [model.domains[p] for p in perm]
    return Sample(variables, domains, codes)


def write_csv(
    sample: Sample | Iterable[SampleRecord],
    dest: str | IO[str],
    variables: Sequence[str] | None = None,
) -> None:
    """Write collapsed records as CSV: header of variable names, canonical
    subset literals as cells, newline-terminated rows."""
    if hasattr(dest, "write"):
        _write_csv_stream(sample, dest, variables)
    else:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            _write_csv_stream(sample, fh, variables)


def _write_csv_stream(sample, stream, variables) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    if isinstance(sample, Sample):
        writer.writerow(sample.variables)
        cols = [m[sample.codes[:, j]] for j, m in enumerate(sample._collapse_maps)]
        writer.writerows(zip(*cols))
        return
    records = list(sample)
    if variables is None:
        if not records:
            raise ValueError("variables are required to write an empty record list")
        variables = records[0].variables
    writer.writerow(list(variables))
    for rec in records:
        writer.writerow([str(m) for m in rec.collapsed])
