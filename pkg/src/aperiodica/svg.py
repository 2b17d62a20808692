"""Deterministic SVG emitters: point scatters and spectrum stem plots.

Output depends only on the input arrays (fixed number formatting, no
timestamps or ids), so identical input gives byte-identical documents.
"""
from __future__ import annotations

import numpy as np

W, H, M = 640, 640, 48


def _f(x: float) -> str:
    return f"{x:.3f}"


def _frame(width, height, title: str, body: list[str], x_label="", y_label="") -> str:
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{M}" y1="{height - M}" x2="{width - M}" y2="{height - M}" stroke="black"/>',
        f'<line x1="{M}" y1="{M}" x2="{M}" y2="{height - M}" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.0f}" y="{M / 2:.0f}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="14">{_escape(title)}</text>')
    if x_label:
        out.append(f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="12">{_escape(x_label)}</text>')
    if y_label:
        out.append(f'<text x="14" y="{height / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="12" transform="rotate(-90 14 {height / 2:.0f})">{_escape(y_label)}</text>')
    out.extend(body)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _scale(v, lo, hi, a, b):
    span = hi - lo if hi > lo else 1.0
    return a + (v - lo) / span * (b - a)


def scatter_svg(points, title: str = "", radius: float = 1.5) -> str:
    """Scatter of 2-D points (first two coordinates); 1-D sets drawn on a line."""
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        return _frame(W, H, title, [])
    P = P.reshape(len(P), -1)
    if P.shape[1] == 1:
        P = np.column_stack([P[:, 0], np.zeros(len(P))])
    P = P[:, :2]
    lo = P.min(axis=0)
    hi = P.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    mid = (lo + hi) / 2
    lo, hi = mid - span / 2, mid + span / 2
    body = []
    for x, y in P:
        cx = _scale(x, lo[0], hi[0], M, W - M)
        cy = _scale(y, lo[1], hi[1], H - M, M)
        body.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{radius}" fill="black"/>')
    return _frame(W, H, title, body, "x", "y")


def stem_svg(k, intensity, title: str = "", log: bool = False) -> str:
    """Stem plot of (k, intensity); k uses the first coordinate (or |k| for d > 1)."""
    K = np.asarray(k, dtype=float)
    I = np.asarray(intensity, dtype=float).reshape(-1)
    if I.size == 0:
        return _frame(W, H // 2, title, [])
    K = K.reshape(len(I), -1)
    x = K[:, 0] if K.shape[1] == 1 else np.linalg.norm(K, axis=1)
    y = np.log10(np.maximum(I, 1e-12)) if log else I
    order = np.lexsort((y, x))
    x, y = x[order], y[order]
    base = float(y.min()) if log else 0.0
    top = float(y.max()) if y.max() > base else base + 1
    height = H // 2
    body = []
    for xi, yi in zip(x, y):
        cx = _scale(xi, float(x.min()), float(x.max()), M, W - M)
        cy = _scale(yi, base, top, height - M, M)
        body.append(f'<line x1="{_f(cx)}" y1="{height - M}" x2="{_f(cx)}" y2="{_f(cy)}" '
                    f'stroke="navy" stroke-width="1"/>')
    return _frame(W, height, title, body, "k", "log10 I" if log else "I")
