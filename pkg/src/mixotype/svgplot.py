"""Minimal SVG line plots: polylines, axes with ticks, labels and a legend."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")


def nice_ticks(lo, hi, count=5):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    return [first + i * step for i in range(int((hi - first) / step + 1e-9) + 1)]


class Plot:
    def __init__(self, title="", xlabel="", ylabel="", width=640, height=480):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.width, self.height = width, height
        self.series = []
        self.margin = (70, 20, 40, 55)   # left, right, top, bottom

    def line(self, xs, ys, label=None, color=None, dash=None, width=1.5):
        xs, ys = np.asarray(xs, float), np.asarray(ys, float)
        color = color or PALETTE[len(self.series) % len(PALETTE)]
        self.series.append(("line", xs, ys, label, color, dash, width))
        return self

    def points(self, xs, ys, label=None, color=None, radius=2.0):
        xs, ys = np.asarray(xs, float), np.asarray(ys, float)
        color = color or PALETTE[len(self.series) % len(PALETTE)]
        self.series.append(("points", xs, ys, label, color, None, radius))
        return self

    def _limits(self):
        xs = np.concatenate([s[1][np.isfinite(s[1])] for s in self.series] or [np.zeros(1)])
        ys = np.concatenate([s[2][np.isfinite(s[2])] for s in self.series] or [np.zeros(1)])
        if xs.size == 0:
            xs = np.zeros(1)
        if ys.size == 0:
            ys = np.zeros(1)
        x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
        padx = 0.05 * (x1 - x0) or 1.0
        pady = 0.05 * (y1 - y0) or 1.0
        return x0 - padx, x1 + padx, y0 - pady, y1 + pady

    def render(self) -> str:
        left, right, top, bottom = self.margin
        pw, ph = self.width - left - right, self.height - top - bottom
        x0, x1, y0, y1 = self._limits()

        def sx(x):
            return left + (x - x0) / (x1 - x0) * pw

        def sy(y):
            return top + ph - (y - y0) / (y1 - y0) * ph

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
               f'height="{self.height}" viewBox="0 0 {self.width} {self.height}" '
               f'font-family="sans-serif" font-size="12">',
               f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
               f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
        for t in nice_ticks(x0, x1):
            X = sx(t)
            out.append(f'<line x1="{X:.2f}" y1="{top + ph}" x2="{X:.2f}" y2="{top + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{X:.2f}" y="{top + ph + 18}" text-anchor="middle">{t:.4g}</text>')
        for t in nice_ticks(y0, y1):
            Y = sy(t)
            out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="black"/>')
            out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" text-anchor="end">{t:.4g}</text>')
        out.append(f'<text x="{left + pw / 2}" y="{self.height - 12}" text-anchor="middle">'
                   f'{escape(self.xlabel)}</text>')
        out.append(f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {top + ph / 2})">{escape(self.ylabel)}</text>')
        out.append(f'<text x="{left + pw / 2}" y="{top - 14}" text-anchor="middle" '
                   f'font-size="14">{escape(self.title)}</text>')
        out.append(f'<clipPath id="plotarea"><rect x="{left}" y="{top}" width="{pw}" '
                   f'height="{ph}"/></clipPath><g clip-path="url(#plotarea)">')
        for kind, xs, ys, _, color, dash, width in self.series:
            ok = np.isfinite(xs) & np.isfinite(ys)
            if kind == "points":
                for x, y in zip(xs[ok], ys[ok]):
                    out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="{width}" fill="{color}"/>')
                continue
            # break the polyline at non-finite samples
            runs, cur = [], []
            for good, x, y in zip(ok, xs, ys):
                if good:
                    cur.append(f"{sx(x):.2f},{sy(y):.2f}")
                elif cur:
                    runs.append(cur)
                    cur = []
            if cur:
                runs.append(cur)
            style = f' stroke-dasharray="{dash}"' if dash else ""
            for run in runs:
                out.append(f'<polyline points="{" ".join(run)}" fill="none" stroke="{color}" '
                           f'stroke-width="{width}"{style}/>')
        out.append("</g>")
        labelled = [s for s in self.series if s[3]]
        for i, (_, _, _, label, color, dash, _) in enumerate(labelled):
            y = top + 14 + 16 * i
            style = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(f'<line x1="{left + 10}" y1="{y - 4}" x2="{left + 34}" y2="{y - 4}" '
                       f'stroke="{color}" stroke-width="2"{style}/>')
            out.append(f'<text x="{left + 40}" y="{y}">{escape(label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())
