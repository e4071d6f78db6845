"""Serialization of frontiers and feedback designs.

Region files: CSV with header ``R1,R2`` and 12-significant-digit values
(re-reading and re-emitting a file is byte-identical), JSON with stable
key order, or a minimal static SVG of the frontier polyline.  Design
files: JSON with one record per stored block.
"""

import json

import numpy as np

from .blockmat import BlockTriangularSet
from .frontier import RegionFrontier
from .regions import FeedbackDesign

__all__ = [
    "format_rate",
    "region_to_csv",
    "region_from_csv",
    "region_to_json",
    "region_from_json",
    "region_to_svg",
    "design_to_json",
    "design_from_json",
]


def format_rate(x):
    return f"{float(x):.12g}"


def region_to_csv(frontier):
    lines = ["R1,R2"]
    for r1, r2 in frontier.points:
        lines.append(f"{format_rate(r1)},{format_rate(r2)}")
    return "\n".join(lines) + "\n"


def region_from_csv(text):
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "R1,R2":
        raise ValueError("region CSV must start with the header 'R1,R2'")
    pts = []
    for ln in lines[1:]:
        a, b = ln.split(",")
        pts.append((float(a), float(b)))
    return RegionFrontier(np.array(pts))


def _jsonable_meta(meta):
    out = {}
    for k, v in meta.items():
        if isinstance(v, (np.floating, np.integer)):
            out[k] = v.item()
        elif isinstance(v, np.ndarray):
            out[k] = v.tolist()
        else:
            out[k] = v
    return out


def region_to_json(frontier):
    payload = {
        "meta": _jsonable_meta(frontier.meta),
        "points": [[format_rate(r1), format_rate(r2)]
                   for r1, r2 in frontier.points],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def region_from_json(text):
    payload = json.loads(text)
    pts = np.array([[float(a), float(b)] for a, b in payload["points"]])
    return RegionFrontier(pts, payload.get("meta", {}))


def region_to_svg(frontier, width=480, height=480, margin=48):
    """Static SVG 1.1 with axes, extreme tick labels, and the polyline."""
    pts = frontier.points
    xmax = max(float(pts[:, 0].max()), 1e-9) * 1.05
    ymax = max(float(pts[:, 1].max()), 1e-9) * 1.05
    inner_w = width - 2 * margin
    inner_h = height - 2 * margin

    def sx(x):
        return margin + x / xmax * inner_w

    def sy(y):
        return height - margin - y / ymax * inner_h

    poly = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{margin}" '
        f'y2="{margin}" stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 10}" text-anchor="middle" '
        f'font-size="12">R1 [bits/use]</text>',
        f'<text x="14" y="{height // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {height // 2})">R2 [bits/use]</text>',
        f'<text x="{margin}" y="{height - margin + 16}" text-anchor="middle" '
        f'font-size="10">0</text>',
        f'<text x="{width - margin}" y="{height - margin + 16}" '
        f'text-anchor="middle" font-size="10">{xmax:.3g}</text>',
        f'<text x="{margin - 6}" y="{margin}" text-anchor="end" '
        f'font-size="10">{ymax:.3g}</text>',
        f'<polyline points="{poly}" fill="none" stroke="#1f5fa6" '
        f'stroke-width="1.5"/>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def design_to_json(design):
    blocks = []
    for i, s in ((1, design.M1), (2, design.M2)):
        for (l, tau) in sorted(s.blocks):
            blk = s.blocks[(l, tau)]
            blocks.append({
                "i": i,
                "l": l,
                "tau": tau,
                "rows": blk.shape[0],
                "cols": blk.shape[1],
                "entries": [float(v) for v in blk.ravel()],
            })
    payload = {
        "eta": design.eta,
        "form": design.form,
        "dims": {
            "block_rows_1": design.M1.block_rows,
            "block_cols_1": design.M1.block_cols,
            "block_rows_2": design.M2.block_rows,
            "block_cols_2": design.M2.block_cols,
        },
        "blocks": blocks,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def design_from_json(text):
    payload = json.loads(text)
    eta = int(payload["eta"])
    form = payload["form"]
    dims = payload["dims"]
    sets = {
        1: {"rows": int(dims["block_rows_1"]), "cols": int(dims["block_cols_1"]),
            "blocks": {}},
        2: {"rows": int(dims["block_rows_2"]), "cols": int(dims["block_cols_2"]),
            "blocks": {}},
    }
    for rec in payload["blocks"]:
        i = int(rec["i"])
        blk = np.array(rec["entries"], dtype=np.float64).reshape(
            int(rec["rows"]), int(rec["cols"]))
        sets[i]["blocks"][(int(rec["l"]), int(rec["tau"]))] = blk
    m1 = BlockTriangularSet(eta, sets[1]["rows"], sets[1]["cols"], sets[1]["blocks"])
    m2 = BlockTriangularSet(eta, sets[2]["rows"], sets[2]["cols"], sets[2]["blocks"])
    return FeedbackDesign(eta, form, m1, m2)
