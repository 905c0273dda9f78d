"""Record-drawing kernels.

The forward-sampling inner loop (records x nodes categorical draws) dominates
runtime, so it is JIT-compiled with numba when available.  A pure-numpy path
vectorized over records produces byte-identical output; set
``BELNET_DISABLE_NUMBA=1`` to force it.  Both paths draw child index
``#{c : cdf[c] <= u}`` (clamped to the last positive cell), so results do not
depend on the backend or on record-level parallelism.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "BELNET_DISABLE_NUMBA"

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


def active_backend(override: str | None = None) -> str:
    """Resolve the backend name: explicit override > env flag > numba if present."""
    if override not in (None, "auto"):
        if override not in ("numba", "numpy"):
            raise ValueError(f"unknown backend {override!r}")
        if override == "numba" and not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return override
    if os.environ.get(_ENV_FLAG, "").strip() not in ("", "0"):
        return "numpy"
    return "numba" if HAVE_NUMBA else "numpy"


def draw_records(u, out, model, backend: str) -> None:
    """Fill ``out`` (records x nodes, topological order) from uniforms ``u``."""
    args = (
        u,
        out,
        model.cdf_flat,
        model.cdf_off,
        model.dom_size,
        model.clamp_flat,
        model.row_off,
        model.slot_start,
        model.slot_node,
        model.slot_h,
        model.slot_stride,
        model.comp_flat,
        model.comp_off,
        model.n_succ,
    )
    if backend == "numba":
        _draw_numba(*args)
    else:
        _draw_numpy(*args)


def _draw_numpy(
    u, out, cdf_flat, cdf_off, dom_size, clamp_flat, row_off,
    slot_start, slot_node, slot_h, slot_stride, comp_flat, comp_off, n_succ,
):
    n_nodes = out.shape[1]
    for j in range(n_nodes):
        rows = np.zeros(out.shape[0], dtype=np.int64)
        for t in range(slot_start[j], slot_start[j + 1]):
            p = slot_node[t]
            ci = comp_flat[comp_off[p] + out[:, p] * n_succ[p] + slot_h[t]]
            rows += ci * slot_stride[t]
        d = int(dom_size[j])
        cdfs = cdf_flat[(cdf_off[j] + rows * d)[:, None] + np.arange(d)]
        idx = (cdfs <= u[:, j : j + 1]).sum(axis=1)
        np.minimum(idx, clamp_flat[row_off[j] + rows], out=idx)
        out[:, j] = idx


if HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _draw_numba(
        u, out, cdf_flat, cdf_off, dom_size, clamp_flat, row_off,
        slot_start, slot_node, slot_h, slot_stride, comp_flat, comp_off, n_succ,
    ):  # pragma: no cover - measured through its outputs
        n_records = out.shape[0]
        n_nodes = out.shape[1]
        for r in prange(n_records):
            for j in range(n_nodes):
                row = 0
                for t in range(slot_start[j], slot_start[j + 1]):
                    p = slot_node[t]
                    ci = comp_flat[comp_off[p] + out[r, p] * n_succ[p] + slot_h[t]]
                    row += ci * slot_stride[t]
                base = cdf_off[j] + row * dom_size[j]
                uu = u[r, j]
                idx = 0
                for c in range(dom_size[j]):
                    if cdf_flat[base + c] <= uu:
                        idx += 1
                    else:
                        break
                top = clamp_flat[row_off[j] + row]
                if idx > top:
                    idx = top
                out[r, j] = idx
