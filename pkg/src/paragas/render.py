"""Gantt renderings of schedules: time on the horizontal axis, storage keys
on the vertical axis.  Rendering is purely cosmetic; layout may approximate
rational positions but never feeds back into any computed number.
"""
from __future__ import annotations

from fractions import Fraction

from .scheduler import Schedule, makespan

_PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
            "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")


def _rows(schedule: Schedule) -> list[tuple[str, list]]:
    """Per storage key, the (tx_id, start, end) segments that lock it."""
    keys = sorted(schedule.txs.all_keys())
    rows = []
    for key in keys:
        segs = [(tx.tx_id, schedule.starts[tx.tx_id],
                 schedule.starts[tx.tx_id] + tx.time)
                for tx in schedule.txs if key in tx.keys]
        rows.append((key, sorted(segs, key=lambda s: (s[1], s[0]))))
    return rows


def gantt_text(schedule: Schedule, width: int = 60) -> str:
    span = makespan(schedule)
    if span == 0:
        return "(empty schedule)"
    scale = Fraction(width) / span
    label_w = max([len(k) for k in schedule.txs.all_keys()] + [4])
    lines = [f"makespan = {span} ({float(span):g})"]
    for key, segs in _rows(schedule):
        row = [" "] * width
        for tx_id, start, end in segs:
            a = int(start * scale)
            b = max(a + 1, int(end * scale))
            mark = (tx_id[-1] if tx_id else "#")
            for i in range(a, min(b, width)):
                row[i] = mark
            label_at = min(a, width - len(tx_id))
            for j, ch in enumerate(tx_id[:max(0, b - a)]):
                if 0 <= label_at + j < width:
                    row[label_at + j] = ch
        lines.append(f"{key:<{label_w}} |{''.join(row)}|")
    axis = " " * label_w + "  0" + " " * (width - len(str(span)) - 1) + str(span)
    lines.append(axis)
    return "\n".join(lines)


def gantt_svg(schedule: Schedule, px_per_unit: int = 48,
              row_height: int = 28) -> str:
    span = makespan(schedule)
    rows = _rows(schedule)
    label_w = 90
    chart_w = max(int(float(span) * px_per_unit), px_per_unit)
    width = label_w + chart_w + 20
    height = (len(rows) + 1) * row_height + 30
    colors = {tx.tx_id: _PALETTE[i % len(_PALETTE)]
              for i, tx in enumerate(schedule.txs)}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" font-family="monospace" font-size="12">',
        f'<text x="4" y="16">makespan = {span}</text>',
    ]
    for r, (key, segs) in enumerate(rows):
        y = 24 + r * row_height
        parts.append(f'<text x="4" y="{y + row_height * 2 // 3}">{key}</text>')
        parts.append(f'<line x1="{label_w}" y1="{y + row_height}" '
                     f'x2="{label_w + chart_w}" y2="{y + row_height}" '
                     f'stroke="#ddd"/>')
        for tx_id, start, end in segs:
            x = label_w + float(start) * px_per_unit
            w = max(float(end - start) * px_per_unit, 1.0)
            parts.append(
                f'<rect x="{x:.2f}" y="{y + 3}" width="{w:.2f}" '
                f'height="{row_height - 6}" fill="{colors[tx_id]}" '
                f'stroke="#333"><title>{tx_id}: [{start}, {end})</title>'
                f'</rect>')
            parts.append(f'<text x="{x + 3:.2f}" '
                         f'y="{y + row_height * 2 // 3}" '
                         f'fill="#fff">{tx_id}</text>')
    # integer time ticks
    axis_y = 24 + len(rows) * row_height
    tick = 0
    while tick <= float(span):
        x = label_w + tick * px_per_unit
        parts.append(f'<line x1="{x}" y1="24" x2="{x}" y2="{axis_y}" '
                     f'stroke="#eee"/>')
        parts.append(f'<text x="{x - 3}" y="{axis_y + 16}">{tick}</text>')
        tick += 1
    parts.append('</svg>')
    return "\n".join(parts)
