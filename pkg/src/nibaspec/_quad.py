"""Composite adaptive Gauss-Legendre quadrature over explicit panel edges.

Shared by the bath-correlation and kernel-integral evaluators. Integrands are
vectorized over nodes and may return several integrands at once (leading
axes); panels are bisected wherever the low- and high-order estimates
disagree beyond the local error budget.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _gl_rule(order: int):
    # nodes/weights mapped to [0, 1]
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def panel_edges(a: float, b: float, max_width: float, breakpoints=()) -> np.ndarray:
    """Strictly increasing edges spanning [a, b] with panels no wider than
    max_width, refined through any interior breakpoints."""
    if b <= a:
        raise ValueError(f"empty integration range [{a}, {b}]")
    pts = [a, b]
    for p in breakpoints:
        if a < p < b:
            pts.append(float(p))
    pts = np.unique(np.asarray(pts, dtype=float))
    edges = [pts[0]]
    for left, right in zip(pts[:-1], pts[1:]):
        n = max(1, int(np.ceil((right - left) / max_width)))
        edges.extend(np.linspace(left, right, n + 1)[1:])
    return np.asarray(edges)


def integrate_panels(
    f,
    edges: np.ndarray,
    abs_tol: float,
    order_lo: int = 12,
    order_hi: int = 24,
    max_depth: int = 14,
    max_nodes: int = 20_000_000,
):
    """Integrate f over the union of panels defined by `edges`.

    f(x) must accept a 1-d array of nodes and return an array whose last axis
    matches x; several integrands may be stacked along leading axes. Returns
    (integral, err_estimate) where integral has f's leading shape. abs_tol is
    a global absolute budget distributed over panels by width.
    """
    u_lo, w_lo = _gl_rule(order_lo)
    u_hi, w_hi = _gl_rule(order_hi)
    total_width = float(edges[-1] - edges[0])

    pending_a = np.asarray(edges[:-1], dtype=float)
    pending_b = np.asarray(edges[1:], dtype=float)
    depth = np.zeros(pending_a.size, dtype=int)

    total = None
    err_total = 0.0
    nodes_used = 0

    while pending_a.size:
        widths = pending_b - pending_a
        x_lo = pending_a[:, None] + widths[:, None] * u_lo[None, :]
        x_hi = pending_a[:, None] + widths[:, None] * u_hi[None, :]
        n_panels = pending_a.size
        nodes_used += n_panels * (order_lo + order_hi)
        if nodes_used > max_nodes:
            raise RuntimeError(
                f"quadrature exceeded node budget ({max_nodes}); "
                "integrand may be unresolvable at the requested tolerance"
            )

        v_lo = f(x_lo.ravel())
        v_hi = f(x_hi.ravel())
        v_lo = v_lo.reshape(v_lo.shape[:-1] + (n_panels, order_lo))
        v_hi = v_hi.reshape(v_hi.shape[:-1] + (n_panels, order_hi))
        i_lo = (v_lo * w_lo).sum(axis=-1) * widths
        i_hi = (v_hi * w_hi).sum(axis=-1) * widths

        diff = np.abs(i_hi - i_lo)
        panel_err = diff.reshape(-1, n_panels).max(axis=0) if diff.ndim > 1 else diff
        budget = abs_tol * widths / total_width
        done = (panel_err <= budget) | (depth >= max_depth)

        contrib = i_hi[..., done].sum(axis=-1)
        total = contrib if total is None else total + contrib
        err_total += float(panel_err[done].sum())

        keep = ~done
        if not keep.any():
            break
        a_k, b_k, d_k = pending_a[keep], pending_b[keep], depth[keep]
        mid = 0.5 * (a_k + b_k)
        pending_a = np.concatenate([a_k, mid])
        pending_b = np.concatenate([mid, b_k])
        depth = np.concatenate([d_k + 1, d_k + 1])

    return total, err_total
