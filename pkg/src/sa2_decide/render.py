"""SVG rendering of the positive-scale cells, the d/e points and the lineality space."""
from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Polygon  # noqa: E402

from .algebra import ElementKind, Instance  # noqa: E402
from .cells import Cell, Lineality, LinealityKind, ScaleCaseData, build_scale_case, cone_lineality, scale_criterion  # noqa: E402
from .errors import InputError  # noqa: E402
from .models import Caps  # noqa: E402
from .sl2group import GroupKind, analyze_group  # noqa: E402

logger = logging.getLogger(__name__)

_SHADE = "#9ecae1"
_LINEALITY = "#d62728"
_GRID = tuple(Cell(sx, sy) for sx in (-1, 0, 1) for sy in (-1, 0, 1))


def scale_case_data(inst: Instance, caps: Caps | None = None) -> ScaleCaseData:
    """
    Positive-scale data for an instance, or InputError when it lands elsewhere.

    Raises:
        InputError: If the matrix parts are not a cyclic group generated by a positive scale
    """
    group = analyze_group(inst.matrices, caps or Caps())
    if group.kind is not GroupKind.CYCLIC or group.element_class.kind is not ElementKind.POSITIVE_SCALE:
        raise InputError(f"instance is not in the positive-scale case (matrix group: {group})")
    return build_scale_case(inst, group.generator, group.exponents)


def _cell_id(cell: Cell) -> str:
    return f"{cell.sx:+d}_{cell.sy:+d}"


def _label_cell(ax, cell: Cell, extent: float) -> None:
    # quadrants near their corner, half-axes near their end, the origin just off it
    scale = 0.85 if cell.dimension else 0.08
    x = cell.sx * extent * scale if cell.dimension else extent * scale
    y = cell.sy * extent * scale if cell.dimension else -extent * scale
    ax.text(x, y, str(cell), color="gray", fontsize=8, ha="center", va="center", gid=f"cell_{_cell_id(cell)}")


def _shade_cell(ax, cell: Cell, extent: float) -> None:
    gid = f"occupied_{_cell_id(cell)}"
    if cell.dimension == 2:
        corner = (cell.sx * extent, cell.sy * extent)
        ax.add_patch(
            Polygon(
                [(0, 0), (corner[0], 0), corner, (0, corner[1])], closed=True, color=_SHADE, alpha=0.5, lw=0, gid=gid
            )
        )
    elif cell.dimension == 1:
        ax.plot([0, cell.sx * extent], [0, cell.sy * extent], color=_SHADE, lw=6, alpha=0.8, gid=gid)
    else:
        ax.plot([0], [0], "o", color=_SHADE, markersize=14, alpha=0.8, gid=gid)


def _draw_lineality(ax, lineality: Lineality, extent: float) -> None:
    if lineality.kind is LinealityKind.PLANE:
        ax.add_patch(
            Polygon(
                [(-extent, -extent), (extent, -extent), (extent, extent), (-extent, extent)],
                closed=True,
                fill=False,
                hatch="//",
                edgecolor=_LINEALITY,
                lw=0,
            )
        )
    elif lineality.kind is LinealityKind.LINE:
        dx, dy = lineality.direction
        ax.plot([-dx * extent, dx * extent], [-dy * extent, dy * extent], color=_LINEALITY, lw=2)
    else:
        ax.plot([0], [0], "s", color=_LINEALITY, markersize=6)


def render_cells_svg(inst: Instance, out_path: str | Path, caps: Caps | None = None) -> Path:
    """
    Write an SVG of the nine sign cells, each labelled, with the occupied set
    S shaded, the d_ij and e_k points and the lineality space of cone(S),
    annotated with the criterion's answer. Text stays as SVG text.

    Point positions are converted to floats here only; nothing drawn feeds
    back into a decision.

    Args:
        inst: Instance in the positive-scale case
        out_path: Destination file
        caps: Caps for the matrix-group analysis

    Returns:
        The written path

    Raises:
        InputError: If the instance is not in the positive-scale case; no file is written
    """
    data = scale_case_data(inst, caps)
    lineality = cone_lineality(data.cells)
    is_group = scale_criterion(data)

    points = [(f"d{i + 1}{j + 1}", vector) for (i, j), vector in sorted(data.d.items())]
    points += [(f"e{k + 1}", vector) for k, vector in sorted(data.e.items())]
    floats = [(label, float(x), float(y)) for label, (x, y) in points]
    extent = max([1.0] + [abs(v) for _, x, y in floats for v in (x, y)]) * 1.25

    fig, ax = plt.subplots(figsize=(6, 6))
    try:
        for cell in _GRID:
            _label_cell(ax, cell, extent)
        for cell in data.cells:
            _shade_cell(ax, cell, extent)
        _draw_lineality(ax, lineality, extent)
        # cell boundaries
        ax.axhline(0, color="black", lw=0.8)
        ax.axvline(0, color="black", lw=0.8)
        for label, x, y in floats:
            ax.plot([x], [y], "o", color="black", markersize=4)
            ax.annotate(label, (x, y), textcoords="offset points", xytext=(4, 4), fontsize=9)
        ax.set_xlim(-extent, extent)
        ax.set_ylim(-extent, extent)
        ax.set_aspect("equal")
        ax.set_xlabel("stretching coordinate")
        ax.set_ylabel("compressing coordinate")
        cells = " ".join(str(c) for c in sorted(data.cells))
        verdict = "group" if is_group else "not a group"
        ax.set_title(f"S = {cells}; lineality {lineality}; {verdict}", fontsize=10)
        out_path = Path(out_path)
        with plt.rc_context({"svg.fonttype": "none"}):
            fig.savefig(out_path, format="svg")
    finally:
        plt.close(fig)
    logger.info("wrote cells plot to %s", out_path)
    return out_path
