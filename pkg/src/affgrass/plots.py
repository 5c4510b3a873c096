"""Deterministic SVG plots written directly as text (no plotting dependency)."""

import math

import numpy as np

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 50
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _num(x):
    return "%.6g" % x


def _escape(text):
    return str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


class _Canvas:
    def __init__(self, title, xlabel, ylabel, xlim, ylim, logx=False, logy=False):
        self.logx, self.logy = logx, logy
        self.x0, self.x1 = self._t(xlim, logx)
        self.y0, self.y1 = self._t(ylim, logy)
        self.parts = []
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel

    @staticmethod
    def _t(lim, log):
        lo, hi = (math.log10(v) for v in lim) if log else lim
        if not hi > lo:
            lo, hi = lo - 0.5, hi + 0.5
        return lo, hi

    def px(self, x):
        x = math.log10(x) if self.logx else x
        return MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)

    def py(self, y):
        y = math.log10(y) if self.logy else y
        return HEIGHT - MARGIN_B - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)

    def polyline(self, xs, ys, color, width=1.0, dash=None):
        pts = " ".join(f"{_num(self.px(x))},{_num(self.py(y))}" for x, y in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="{_num(width)}"{extra} points="{pts}"/>'
        )

    def hline(self, y, color="#444444", dash="4,3"):
        self.parts.append(
            f'<line x1="{MARGIN_L}" x2="{WIDTH - MARGIN_R}" y1="{_num(self.py(y))}" '
            f'y2="{_num(self.py(y))}" stroke="{color}" stroke-dasharray="{dash}"/>'
        )

    def circle(self, x, y, color, r=1.8):
        self.parts.append(
            f'<circle cx="{_num(self.px(x))}" cy="{_num(self.py(y))}" r="{_num(r)}" fill="{color}" fill-opacity="0.6"/>'
        )

    def rect(self, x_lo, x_hi, y_lo, y_hi, color):
        left, right = self.px(x_lo), self.px(x_hi)
        top, bottom = self.py(y_hi), self.py(y_lo)
        self.parts.append(
            f'<rect x="{_num(left)}" y="{_num(top)}" width="{_num(right - left)}" '
            f'height="{_num(bottom - top)}" fill="{color}"/>'
        )

    def segment(self, xa, ya, xb, yb, color="#000000"):
        self.parts.append(
            f'<line x1="{_num(self.px(xa))}" y1="{_num(self.py(ya))}" x2="{_num(self.px(xb))}" '
            f'y2="{_num(self.py(yb))}" stroke="{color}"/>'
        )

    def _ticks(self, lo, hi, log):
        if log:
            return [10.0 ** e for e in range(math.ceil(lo), math.floor(hi) + 1)]
        return list(np.linspace(lo, hi, 5))

    def render(self):
        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
            f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" font-size="14">{_escape(self.title)}</text>',
            f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{WIDTH - MARGIN_L - MARGIN_R}" '
            f'height="{HEIGHT - MARGIN_T - MARGIN_B}" fill="none" stroke="#000000"/>',
        ]
        for t in self._ticks(self.x0, self.x1, self.logx):
            x = self.px(t)
            out.append(f'<line x1="{_num(x)}" x2="{_num(x)}" y1="{HEIGHT - MARGIN_B}" '
                       f'y2="{HEIGHT - MARGIN_B + 4}" stroke="#000000"/>')
            out.append(f'<text x="{_num(x)}" y="{HEIGHT - MARGIN_B + 16}" text-anchor="middle">{_num(t)}</text>')
        for t in self._ticks(self.y0, self.y1, self.logy):
            y = self.py(t)
            out.append(f'<line x1="{MARGIN_L - 4}" x2="{MARGIN_L}" y1="{_num(y)}" y2="{_num(y)}" stroke="#000000"/>')
            out.append(f'<text x="{MARGIN_L - 6}" y="{_num(y + 4)}" text-anchor="end">{_num(t)}</text>')
        out.append(f'<text x="{(WIDTH + MARGIN_L) // 2}" y="{HEIGHT - 12}" text-anchor="middle">'
                   f'{_escape(self.xlabel)}</text>')
        out.append(f'<text x="16" y="{HEIGHT // 2}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {HEIGHT // 2})">{_escape(self.ylabel)}</text>')
        clip = (f'<clipPath id="plot"><rect x="{MARGIN_L}" y="{MARGIN_T}" '
                f'width="{WIDTH - MARGIN_L - MARGIN_R}" height="{HEIGHT - MARGIN_T - MARGIN_B}"/></clipPath>')
        out.append(clip)
        out.append('<g clip-path="url(#plot)">')
        out.extend(self.parts)
        out.append("</g>")
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _columns(table):
    header, rows = table
    cols = list(zip(*rows)) if rows else [[] for _ in header]
    return {name: np.asarray(col, dtype=float) for name, col in zip(header, cols)}


def _pad(lo, hi, frac=0.05):
    span = hi - lo if hi > lo else max(abs(hi), 1.0)
    return lo - frac * span, hi + frac * span


def spectrum_svg(table):
    c = _columns(table)
    p, lam, se = c["p"], c["lambda"], c["stderr"]
    lo = min(0.0, float(np.min(lam - se)))
    hi = max(0.0, float(np.max(lam + se)))
    cv = _Canvas("Lyapunov spectrum", "p", "lambda_p", (0.4, len(p) + 0.6), _pad(lo, hi))
    for i, (pi, li, si) in enumerate(zip(p, lam, se)):
        cv.rect(pi - 0.3, pi + 0.3, min(0.0, li), max(0.0, li), PALETTE[i % len(PALETTE)])
        cv.segment(pi, li - si, pi, li + si)
        cv.segment(pi - 0.1, li - si, pi + 0.1, li - si)
        cv.segment(pi - 0.1, li + si, pi + 0.1, li + si)
    cv.hline(0.0)
    return cv.render()


def cesaro_svg(table):
    c = _columns(table)
    n, m, se = c["n"], c["mass"], c["stderr"]
    cv = _Canvas("Cesaro mass in the ball", "n", "mass", (max(n.min(), 1.0), max(n.max(), 2.0)),
                 (-0.02, 1.02), logx=True)
    cv.polyline(n, m, PALETTE[0], 1.5)
    cv.polyline(n, np.clip(m + 2 * se, 0, 1), PALETTE[0], 0.6, dash="2,2")
    cv.polyline(n, np.clip(m - 2 * se, 0, 1), PALETTE[0], 0.6, dash="2,2")
    cv.hline(0.9)
    cv.hline(0.1)
    return cv.render()


def _by_word(c, ycol):
    words = np.unique(c["word"])
    return [(c["n"][c["word"] == w], c[ycol][c["word"] == w]) for w in words]


def ratio_svg(table):
    c = _columns(table)
    lo = float(min(c["T_n"].min(), c["runsup"].min()))
    hi = float(max(c["T_n"].max(), c["runsup"].max()))
    cv = _Canvas("T_n and running sup", "n", "T_n", (max(c["n"].min(), 1.0), max(c["n"].max(), 2.0)),
                 _pad(lo, hi), logx=True)
    for i, ((n, t), (_, s)) in enumerate(zip(_by_word(c, "T_n"), _by_word(c, "runsup"))):
        color = PALETTE[i % len(PALETTE)]
        cv.polyline(n, t, color, 0.6)
        cv.polyline(n, s, color, 1.4)
    return cv.render()


def coupling_svg(table, floor=1e-17):
    c = _columns(table)
    c["distance"] = np.maximum(c["distance"], floor)
    cv = _Canvas("Backward coupling distance", "n", "projective distance",
                 (max(c["n"].min(), 1.0), max(c["n"].max(), 2.0)),
                 (floor, 1.0), logx=True, logy=True)
    for i, (n, dist) in enumerate(_by_word(c, "distance")):
        cv.polyline(n, dist, PALETTE[i % len(PALETTE)], 0.6)
    cv.hline(1e-6)
    return cv.render()


def drift_svg(table):
    c = _columns(table)
    mid = np.sqrt(c["cell_lo"] * c["cell_hi"])
    upper = c["ratio_mean"] + 2 * c["stderr"]
    lo = float(min(c["ratio_mean"].min(), 0.0))
    hi = float(max(upper.max(), 1.05))
    cv = _Canvas("Drift ratio per cell", "u_1 (cell midpoint)", "E[u(gx)]/u(x)",
                 (float(c["cell_lo"].min()), float(c["cell_hi"].max())), _pad(lo, hi), logx=True)
    cv.polyline(mid, c["ratio_mean"], PALETTE[0], 1.5)
    cv.polyline(mid, upper, PALETTE[3], 0.8, dash="3,2")
    for x, y in zip(mid, c["ratio_mean"]):
        cv.circle(x, y, PALETTE[0], 2.5)
    cv.hline(1.0)
    return cv.render()


def lil_svg(table, phi, dilation=1.5):
    c = _columns(table)
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if "x2" not in c:
        x = c["x1"]
        r = dilation * math.sqrt(max(phi[0, 0], 0.0))
        lim = max(float(np.abs(x).max(initial=0.0)), r, 1e-12)
        cv = _Canvas("LIL-normalized excursions", "n", "x1",
                     (max(c["n"].min(), 1.0), max(c["n"].max(), 2.0)), _pad(-lim, lim), logx=True)
        for n, xv in zip(c["n"], x):
            cv.circle(n, xv, PALETTE[0])
        cv.hline(r, PALETTE[3])
        cv.hline(-r, PALETTE[3])
        return cv.render()
    x, y = c["x1"], c["x2"]
    vals, vecs = np.linalg.eigh(phi[:2, :2])
    t = np.linspace(0.0, 2 * math.pi, 121)
    ellipse = dilation * (vecs * np.sqrt(np.maximum(vals, 0.0))) @ np.stack([np.cos(t), np.sin(t)])
    lim = max(float(np.abs(np.concatenate([x, y])).max(initial=0.0)),
              float(np.abs(ellipse).max()), 1e-12)
    cv = _Canvas("LIL-normalized cloud", "x1", "x2", _pad(-lim, lim), _pad(-lim, lim))
    for xv, yv in zip(x, y):
        cv.circle(xv, yv, PALETTE[0])
    cv.polyline(ellipse[0], ellipse[1], PALETTE[3], 1.2)
    return cv.render()


def emit_plots(bundle):
    """SVG text for every plottable table in ``bundle``; returns ``(files, notes)``."""
    tables = bundle.tables
    svgs, notes = {}, []
    simple = (
        ("spectrum.csv", "spectrum.svg", spectrum_svg),
        ("cesaro_mass.csv", "cesaro.svg", cesaro_svg),
        ("ratio_series.csv", "ratio.svg", ratio_svg),
        ("coupling.csv", "coupling.svg", coupling_svg),
        ("drift_cells.csv", "drift.svg", drift_svg),
    )
    for source, target, fn in simple:
        if source in tables and tables[source][1]:
            svgs[target] = fn(tables[source])
    if "lil_points.csv" in tables and "lil" in bundle.reports:
        rep = bundle.reports["lil"]
        svgs["lil.svg"] = lil_svg(tables["lil_points.csv"], rep["phi"], rep.get("dilation", 1.5))
    if not svgs:
        notes.append("no plottable data in bundle")
    return svgs, notes
