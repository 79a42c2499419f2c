"""Minimal SVG line plots for PR / ROC curves."""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

_W, _H, _M = 420, 420, 50


def svg_curve(x, y, title: str, xlabel: str, ylabel: str, diagonal: bool = False) -> str:
    x = np.clip(np.asarray(x, dtype=float), 0, 1)
    y = np.clip(np.asarray(y, dtype=float), 0, 1)
    span_x, span_y = _W - 2 * _M, _H - 2 * _M

    def px(u, v):
        return f"{_M + u * span_x:.2f},{_H - _M - v * span_y:.2f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_M}" y="{_M}" width="{span_x}" height="{span_y}" fill="none" stroke="black"/>',
    ]
    for t in np.linspace(0, 1, 6):
        x0, y0 = px(t, 0).split(",")
        parts.append(f'<text x="{x0}" y="{float(y0) + 16:.2f}" text-anchor="middle">{t:.1f}</text>')
        x1, y1 = px(0, t).split(",")
        parts.append(f'<text x="{float(x1) - 6:.2f}" y="{float(y1) + 4:.2f}" text-anchor="end">{t:.1f}</text>')
    if diagonal:
        parts.append(f'<polyline points="{px(0, 0)} {px(1, 1)}" fill="none" stroke="#999" stroke-dasharray="4 4"/>')
    pts = " ".join(px(u, v) for u, v in zip(x, y))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>')
    parts.append(f'<text x="{_W / 2}" y="{_M / 2 + 4}" text-anchor="middle" font-size="14">{escape(title)}</text>')
    parts.append(f'<text x="{_W / 2}" y="{_H - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(
        f'<text x="14" y="{_H / 2}" text-anchor="middle" transform="rotate(-90 14 {_H / 2})">{escape(ylabel)}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_curve_plots(curve, out_dir, name: str = "") -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prefix = f"{name}_" if name else ""
    pr = out / f"{prefix}pr.svg"
    roc = out / f"{prefix}roc.svg"
    pr.write_text(svg_curve(curve.recall, curve.precision, f"{name} precision-recall".strip(), "recall", "precision"))
    roc.write_text(
        svg_curve(np.r_[0, curve.fpr], np.r_[0, curve.tpr], f"{name} ROC".strip(), "false positive rate", "true positive rate", diagonal=True)
    )
    return [pr, roc]
