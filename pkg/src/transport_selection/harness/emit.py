"""
Artifact writers

CSV tables carry a one-line schema header and fixed float formatting; SVG renderings
are produced with a fixed hash salt and no date so identical configs give identical bytes.
"""
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

import pandas as pd

from ..errors import ConfigError
from ..dyadic.grid import CellGrid

logger = logging.getLogger(__name__)

SCHEMA = 1
FORMATS = ("csv", "svg")
FLOAT_FORMAT = "%.12g"
FAILURES = "failures"


def csv_header(name: str) -> str:
    return f"# transport-selection table={name} schema={SCHEMA}\n"


def write_csv(frame: pd.DataFrame, path: Path, name: str) -> Path:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_header(name))
            frame.to_csv(fh, float_format=FLOAT_FORMAT, lineterminator="\n", index=False)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def write_svg(grid: CellGrid, path: Path, title: Optional[str] = None) -> Path:
    """Chessboard rendering of a cell grid: x1 to the right, x2 upward, 1 drawn dark."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "transport-selection", "svg.fonttype": "none"}):
        x0, y0, width, height = (float(c) for c in grid.window)
        fig, ax = plt.subplots(figsize=(4, 4))
        ax.imshow(grid.as_float().T, origin="lower", cmap="Greys", vmin=0.0, vmax=1.0,
                  extent=(x0, x0 + width, y0, y0 + height), interpolation="nearest")
        ax.set_aspect("equal")
        if title:
            ax.set_title(title)
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        finally:
            plt.close(fig)
    return path


def emit(table: Union[pd.DataFrame, CellGrid], fmt: str, out_dir: Path, name: str) -> Path:
    """
    Write ``table`` as ``<out_dir>/<name>.<fmt>``.

    DataFrames go to CSV only; cell grids go to CSV as (row, col, value) or to SVG.

    Raises:
        ConfigError: unknown format, or SVG requested for a plain table
        OSError: the file cannot be written (message names the path)
    """
    if fmt not in FORMATS:
        raise ConfigError(f"unknown output format {fmt!r}; expected one of {FORMATS}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.{fmt}"
    if fmt == "svg":
        if not isinstance(table, CellGrid):
            raise ConfigError(f"{name}: only cell grids render to SVG")
        write_svg(table, path, name)
    else:
        frame = table.to_frame() if isinstance(table, CellGrid) else table
        write_csv(frame, path, name)
    logger.info("wrote %s", path)
    return path


def write_failures(failures: Iterable[Tuple[str, str]], out_dir: Path) -> Path:
    frame = pd.DataFrame(list(failures), columns=["check", "detail"])
    return emit(frame, "csv", out_dir, FAILURES)


def emit_outcome(outcome, out_dir: Path, svg: bool = False) -> List[Path]:
    """Every table of an experiment outcome, plus its grids (CSV, and SVG when asked)."""
    paths = []
    for name, frame in outcome.tables.items():
        paths.append(emit(frame, "csv", out_dir, f"{outcome.name}_{name}"))
    for name, grid in outcome.grids.items():
        paths.append(emit(grid, "csv", out_dir, f"{outcome.name}_{name}"))
        if svg:
            paths.append(emit(grid, "svg", out_dir, f"{outcome.name}_{name}"))
    return paths
