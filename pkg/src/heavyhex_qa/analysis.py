"""Method comparison across instances and energy histograms."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .instance import SampleSet

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


@dataclass(frozen=True)
class MethodStats:
    mean: float
    min: float
    count: int


@dataclass(frozen=True)
class ComparisonReport:
    methods: tuple[str, ...]
    instances: tuple[str, ...]
    stats: dict[tuple[str, str], MethodStats]
    wins: dict[tuple[str, str], int]
    ties: dict[tuple[str, str], int]

    def to_json(self) -> str:
        doc = {
            "methods": list(self.methods),
            "instances": list(self.instances),
            "stats": [
                {"instance": i, "method": m, "mean": s.mean, "min": s.min, "count": s.count}
                for (i, m), s in sorted(self.stats.items())
            ],
            "wins": {f"{a}>{b}": c for (a, b), c in sorted(self.wins.items())},
            "ties": {f"{a}={b}": c for (a, b), c in sorted(self.ties.items())},
        }
        return json.dumps(doc, indent=2) + "\n"

    def win_table_csv(self) -> str:
        """Row method beats column method on this many instances."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", *self.methods])
        for a in self.methods:
            w.writerow([a, *["" if a == b else self.wins[(a, b)] for b in self.methods]])
        return buf.getvalue()


def analyze_comparison(data: Mapping[str, Mapping[str, SampleSet]]) -> ComparisonReport:
    """``data[instance][method]``; method i beats j on an instance iff its mean is strictly lower."""
    if not data:
        raise ValueError("no instances")
    instances = tuple(sorted(data))
    methods = tuple(sorted(data[instances[0]]))
    for inst in instances:
        if tuple(sorted(data[inst])) != methods:
            raise ValueError(f"instance {inst} has a different method set")
    stats = {}
    for inst in instances:
        for m in methods:
            ss = data[inst][m]
            stats[(inst, m)] = MethodStats(ss.mean_energy(), ss.min_energy(), ss.shots)
    wins: dict[tuple[str, str], int] = {}
    ties: dict[tuple[str, str], int] = {}
    for a in methods:
        for b in methods:
            if a == b:
                continue
            wins[(a, b)] = sum(1 for i in instances if stats[(i, a)].mean < stats[(i, b)].mean)
            ties[(a, b)] = sum(1 for i in instances if stats[(i, a)].mean == stats[(i, b)].mean)
    return ComparisonReport(methods, instances, stats, wins, ties)


def histogram_bins(sets: Sequence[tuple[str, SampleSet]], bin_width: float = 2.0) -> tuple[np.ndarray, list[np.ndarray]]:
    """Shared bin edges (multiples of ``bin_width``) and per-set counts."""
    if not sets:
        raise ValueError("no sample sets")
    if bin_width <= 0:
        raise ValueError("bin width must be positive")
    lo = min(min(ss.energies) for _, ss in sets)
    hi = max(max(ss.energies) for _, ss in sets)
    start = math.floor(lo / bin_width) * bin_width
    nbins = int(math.floor((hi - start) / bin_width)) + 1
    edges = start + bin_width * np.arange(nbins + 1)
    counts = []
    for _, ss in sets:
        c = np.zeros(nbins, dtype=np.int64)
        for e, m in zip(ss.energies, ss.counts):
            c[min(int(math.floor((e - start) / bin_width)), nbins - 1)] += m
        counts.append(c)
    return edges, counts


def _f(v: float) -> str:
    return f"{v:.2f}"


def render_histogram(sets: Sequence[tuple[str, SampleSet]], out_path: str | Path, bin_width: float = 2.0, title: str = "") -> tuple[Path, Path]:
    """Write ``<out>.svg`` and ``<out>.csv``.

    Each set is drawn as a step outline of its normalized bin counts, with a
    dashed vertical line at its mean and a solid one at its minimum.
    """
    out_path = Path(out_path)
    edges, counts = histogram_bins(sets, bin_width)
    svg_path = out_path.with_suffix(".svg")
    csv_path = out_path.with_suffix(".csv")

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_lo", "bin_hi", *[label for label, _ in sets]])
    for b in range(len(edges) - 1):
        w.writerow([repr(float(edges[b])), repr(float(edges[b + 1])), *[int(c[b]) for c in counts]])
    csv_path.write_text(buf.getvalue())

    W, H, ml, mr, mt, mb = 720, 420, 60, 170, 30, 50
    pw, ph = W - ml - mr, H - mt - mb
    x0, x1 = float(edges[0]), float(edges[-1])
    fracs = [c / max(1, c.sum()) for c in counts]
    ymax = max(float(f.max()) for f in fracs) or 1.0

    def X(v: float) -> float:
        return ml + (v - x0) / (x1 - x0) * pw

    def Y(v: float) -> float:
        return mt + ph - v / ymax * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{ml}" y="18" font-family="sans-serif" font-size="13">{title}</text>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
    ]
    nt = min(10, len(edges) - 1)
    for t in np.linspace(x0, x1, nt + 1):
        parts.append(f'<line x1="{_f(X(t))}" y1="{mt + ph}" x2="{_f(X(t))}" y2="{mt + ph + 4}" stroke="black"/>')
        parts.append(f'<text x="{_f(X(t))}" y="{mt + ph + 16}" font-family="sans-serif" font-size="10" text-anchor="middle">{_f(t)}</text>')
    for t in np.linspace(0, ymax, 5):
        parts.append(f'<text x="{ml - 6}" y="{_f(Y(t) + 3)}" font-family="sans-serif" font-size="10" text-anchor="end">{t:.3f}</text>')
    parts.append(f'<text x="{ml + pw / 2}" y="{H - 10}" font-family="sans-serif" font-size="12" text-anchor="middle">energy</text>')
    for idx, ((label, ss), frac) in enumerate(zip(sets, fracs)):
        col = PALETTE[idx % len(PALETTE)]
        pts = [(X(x0), Y(0))]
        for b, v in enumerate(frac):
            pts += [(X(edges[b]), Y(v)), (X(edges[b + 1]), Y(v))]
        pts.append((X(x1), Y(0)))
        path = " ".join(f"{_f(a)},{_f(b)}" for a, b in pts)
        parts.append(f'<polyline points="{path}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        mean, mn = ss.mean_energy(), ss.min_energy()
        parts.append(f'<line class="mean" x1="{_f(X(mean))}" y1="{mt}" x2="{_f(X(mean))}" y2="{mt + ph}" stroke="{col}" stroke-dasharray="6,4"/>')
        parts.append(f'<line class="min" x1="{_f(X(mn))}" y1="{mt}" x2="{_f(X(mn))}" y2="{mt + ph}" stroke="{col}"/>')
        ly = mt + 14 + 18 * idx
        parts.append(f'<line x1="{ml + pw + 12}" y1="{ly - 4}" x2="{ml + pw + 32}" y2="{ly - 4}" stroke="{col}" stroke-width="3"/>')
        parts.append(f'<text x="{ml + pw + 38}" y="{ly}" font-family="sans-serif" font-size="11">{label}</text>')
    parts.append("</svg>")
    svg_path.write_text("\n".join(parts) + "\n")
    return svg_path, csv_path
