"""SVG rendering of routed layouts.

Output is a deterministic byte stream for a given input: element order is
fixed and all coordinates are formatted with a fixed precision.  The
drawing uses screen coordinates (y grows downward), so the physical y axis
is flipped.
"""

from __future__ import annotations

import math

from .kinds import builtin_kinds

_STYLE = (
    "rect.body{fill:#b8c4d9;stroke:#3c4a66;stroke-width:0.5}"
    "rect.defect{fill:#e3a6a1}"
    "circle.pin{fill:#17324d}"
    "circle.bridge{fill:none;stroke:#c0392b;stroke-width:1}"
    "polyline{fill:none;stroke:#1f77b4;stroke-linecap:round}"
    "rect.frame{fill:none;stroke:#555;stroke-width:1}"
)

_PALETTE = ("#1f77b4", "#2ca02c", "#9467bd", "#d62728", "#8c564b", "#e377c2")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_svg(layout_data: dict, field_data: dict | None = None, scale_nm_per_px: float = 100.0) -> str:
    """Render a layout JSON dict (and optionally its observed field) to SVG."""
    if layout_data.get("nets") is None:
        raise ValueError("not a layout document: missing 'nets'")
    region = None
    if field_data is not None:
        region = field_data.get("region")
    if region is None:
        region = _region_from_layout(layout_data)
    w_px = max(region[0] / scale_nm_per_px, 1.0)
    h_px = max(region[1] / scale_nm_per_px, 1.0)

    def tx(x_nm):
        return x_nm / scale_nm_per_px

    def ty(y_nm):
        return (region[1] - y_nm) / scale_nm_per_px

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(w_px)}" height="{_fmt(h_px)}" '
        f'viewBox="0 0 {_fmt(w_px)} {_fmt(h_px)}">',
        f"<style>{_STYLE}</style>",
        f'<rect class="frame" x="0" y="0" width="{_fmt(w_px)}" height="{_fmt(h_px)}"/>',
    ]

    if field_data is not None:
        kinds = builtin_kinds()
        for obs in field_data["observations"]:
            kind = kinds.get(obs["kind"])
            if kind is None:
                continue
            bw, bh = kind.body
            cls = "body defect" if obs["classified_defective"] else "body"
            cx, cy = tx(obs["x_nm"]), ty(obs["y_nm"])
            parts.append(
                f'<rect class="{cls}" x="{_fmt(cx - bw / (2 * scale_nm_per_px))}" '
                f'y="{_fmt(cy - bh / (2 * scale_nm_per_px))}" '
                f'width="{_fmt(bw / scale_nm_per_px)}" height="{_fmt(bh / scale_nm_per_px)}" '
                f'transform="rotate({_fmt(-obs["theta_deg"])} {_fmt(cx)} {_fmt(cy)})"/>'
            )
            for pin in kind.pins:
                t = math.radians(obs["theta_deg"])
                px = obs["x_nm"] + pin.offset[0] * math.cos(t) - pin.offset[1] * math.sin(t)
                py = obs["y_nm"] + pin.offset[0] * math.sin(t) + pin.offset[1] * math.cos(t)
                parts.append(
                    f'<circle class="pin" cx="{_fmt(tx(px))}" cy="{_fmt(ty(py))}" r="1"/>'
                )

    for ni, net in enumerate(layout_data["nets"]):
        color = _PALETTE[ni % len(_PALETTE)]
        for path in net["paths"]:
            pts = path["points"]
            widths = path["widths_nm"] or [150]
            stroke = max(max(widths) / scale_nm_per_px, 0.6)
            coords = " ".join(f"{_fmt(tx(x))},{_fmt(ty(y))}" for x, y in pts)
            parts.append(
                f'<polyline points="{coords}" stroke="{color}" '
                f'stroke-width="{_fmt(stroke)}"><title>{net["id"]}</title></polyline>'
            )
            for bx, by, _crossed in path["bridges"]:
                parts.append(
                    f'<circle class="bridge" cx="{_fmt(tx(bx))}" cy="{_fmt(ty(by))}" r="2"/>'
                )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _region_from_layout(layout_data: dict) -> tuple[int, int]:
    xs, ys = [0], [0]
    for net in layout_data["nets"]:
        for path in net["paths"]:
            for x, y in path["points"]:
                xs.append(x)
                ys.append(y)
    return (max(xs) + 1000, max(ys) + 1000)
