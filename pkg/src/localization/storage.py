"""
Storage of localization results: estimate reports, posterior grids,
heatmaps and study tables.
"""
import io
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from .analysis import ComboTable, UnconditionalCov, subset_label
from .point_mass import AXIS_LABELS, EstimateReport, GridSpec, WeightGrid

logger = logging.getLogger(__name__)

AXIS_UNITS = {"x1": "m", "x2": "m", "heading": "deg"}
PGM_MAXVAL = 255


class StorageError(Exception):
    """Exception raised for errors in the ResultStorage class."""
    pass


def _float(value: float) -> str:
    return f"{float(value):.12g}"


def format_grid(grid: WeightGrid) -> str:
    """
    Plain-text export of a weight grid.

    The first line is the header `n1 n2 nk x1min x1max x2min x2max` (bounds in
    meters), then one row of n1 weights per x2 value (increasing x2), repeated for
    each heading cell.
    """
    spec = grid.spec
    header = " ".join([str(spec.n1), str(spec.n2), str(spec.nk)] + [_float(b) for b in spec.bounds])

    weights = grid.weights
    buffer = io.StringIO()
    for k in range(spec.nk):
        np.savetxt(buffer, weights[:, :, k].T, fmt="%.12e", delimiter=" ")
    return f"{header}\n{buffer.getvalue()}"


def read_grid_file(path: Union[str, Path], known_heading: float = 0.0) -> WeightGrid:
    """
    Read a grid written by format_grid.

    Raises:
        StorageError: If the file is missing or malformed
    """
    try:
        lines = [line for line in Path(path).read_text(encoding="utf-8").splitlines() if not line.startswith("#")]
        fields = lines[0].split()
        n1, n2, nk = (int(v) for v in fields[:3])
        bounds = tuple(float(v) for v in fields[3:7])
        values = np.loadtxt(io.StringIO("\n".join(lines[1:])), ndmin=2)
    except (OSError, IndexError, ValueError) as ex:
        error_msg = f"Failed to read grid file {path}: {str(ex)}"
        logger.error(error_msg)
        raise StorageError(error_msg) from ex

    if values.shape != (n2 * nk, n1):
        raise StorageError(f"Grid file {path} holds {values.shape} values, header says {n2 * nk}x{n1}")

    weights = values.reshape(nk, n2, n1).transpose(2, 1, 0)
    spec = GridSpec(n1=n1, n2=n2, nk=nk, bounds=bounds, known_heading=known_heading)
    with np.errstate(divide="ignore"):
        return WeightGrid(spec=spec, log_weights=np.log(weights))


def encode_pgm(grid: WeightGrid) -> bytes:
    """
    Binary PGM heatmap of the x1-x2 marginal.

    Width is n1 and height n2; the top row holds the largest x2. Pixel
    intensity is round(255 * w / max w).
    """
    plane = grid.weights.sum(axis=2)
    peak = plane.max()
    image = plane.T[::-1, :]
    if peak > 0:
        pixels = np.rint(PGM_MAXVAL * image / peak)
    else:
        pixels = np.zeros_like(image)
    pixels = np.clip(pixels, 0, PGM_MAXVAL).astype(np.uint8)
    header = f"P5\n{grid.spec.n1} {grid.spec.n2}\n{PGM_MAXVAL}\n".encode("ascii")
    return header + pixels.tobytes()


def format_report(report: EstimateReport, label: str = "") -> str:
    """Human-readable estimate report with units."""
    used = subset_label(report.used) if report.used else "-"
    lines = [
        "# Estimate report",
        f"scenario: {label}" if label else "scenario: -",
        f"beams used: {used} ({report.n_measurements} readings)",
        "",
        f"{'axis':<12}{'mean':>14}{'rms':>14}",
    ]
    for axis, mean, rms in zip(report.axes, report.mean, report.rms):
        name = f"{axis} [{AXIS_UNITS[axis]}]"
        lines.append(f"{name:<12}{mean:>14.6f}{rms:>14.6f}")

    lines.append("")
    lines.append("covariance (m^2, m*deg, deg^2):")
    for row in report.covariance:
        lines.append("  " + " ".join(f"{v:>14.6e}" for v in row))
    return "\n".join(lines) + "\n"


def format_combo_table(table: ComboTable) -> str:
    frame = table.to_frame()
    body = frame.to_string(float_format=lambda v: f"{v:.4f}")
    return f"# Posterior RMS per measurement subset\n{body}\n"


def format_unconditional(result: UnconditionalCov, subset: Sequence[int]) -> str:
    """Monte-Carlo covariance next to the averaged conditional covariance."""
    axes = AXIS_LABELS[: result.matrix.shape[0]]
    lines = [
        "# Monte-Carlo error covariance",
        f"beams used: {subset_label(subset)}",
        f"trials: {result.trials} (skipped {result.skipped})",
        "",
        f"{'axis':<12}{'rms':>14}{'cond. rms':>14}{'gap':>10}",
    ]
    for axis, rms, cond, gap in zip(axes, result.rms, result.conditional_rms, result.consistency_gap):
        name = f"{axis} [{AXIS_UNITS[axis]}]"
        lines.append(f"{name:<12}{rms:>14.6f}{cond:>14.6f}{gap:>10.4f}")
    lines.append("")
    lines.append("unconditional covariance:")
    for row in result.matrix:
        lines.append("  " + " ".join(f"{v:>14.6e}" for v in row))
    lines.append("mean conditional covariance:")
    for row in result.mean_conditional_cov:
        lines.append("  " + " ".join(f"{v:>14.6e}" for v in row))
    return "\n".join(lines) + "\n"


def file_label(label: str) -> str:
    """Filesystem-friendly form of a subset label."""
    return label.replace("+", "_")


class ResultStorage:
    """
    Writes results into an output directory.

    File contents never carry timestamps, so repeated runs give identical
    bytes.
    """
    def __init__(self, out_dir: Union[str, Path, None] = None, config: Dict[str, Any] = None):
        self.config = config or {}
        output_config = self.config.get("output", {})
        self.out_dir = Path(out_dir or output_config.get("out_dir") or "data/results")

        self.initialize()

    def initialize(self):
        """Create the output directory."""
        try:
            os.makedirs(self.out_dir, exist_ok=True)
            logger.info(f"Storage initialized with output directory: {self.out_dir}")
        except Exception as ex:
            error_msg = f"Failed to initialize storage: {str(ex)}"
            logger.error(error_msg)
            raise StorageError(error_msg) from ex

    def _write(self, name: str, content: Union[str, bytes]) -> Path:
        path = self.out_dir / name
        try:
            if isinstance(content, bytes):
                path.write_bytes(content)
            else:
                with open(path, "w", encoding="utf-8", newline="\n") as file:
                    file.write(content)
        except Exception as ex:
            error_msg = f"Failed to write {path}: {str(ex)}"
            logger.error(error_msg)
            raise StorageError(error_msg) from ex
        logger.info(f"Wrote {path}")
        return path

    @staticmethod
    def _json(data: Dict[str, Any]) -> str:
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    def write_report(self, report: EstimateReport, label: str = "", name: str = "estimate_report") -> List[Path]:
        """Write the estimate report as text and JSON."""
        data = report.to_dict()
        data["units"] = {axis: AXIS_UNITS[axis] for axis in report.axes}
        data["scenario"] = label
        return [
            self._write(f"{name}.txt", format_report(report, label)),
            self._write(f"{name}.json", self._json(data)),
        ]

    def write_grid(self, grid: WeightGrid, label: str) -> Path:
        return self._write(f"posterior_{file_label(label)}.grid", format_grid(grid))

    def write_heatmap(self, grid: WeightGrid, label: str) -> Path:
        return self._write(f"posterior_{file_label(label)}.pgm", encode_pgm(grid))

    def write_combo_table(self, table: ComboTable, name: str = "table1") -> List[Path]:
        """Write the subset comparison as text and CSV."""
        csv = table.to_frame().to_csv(float_format="%.6f", lineterminator="\n")
        return [
            self._write(f"{name}.txt", format_combo_table(table)),
            self._write(f"{name}.csv", csv),
        ]

    def write_unconditional(self, result: UnconditionalCov, subset: Sequence[int], name: str = "montecarlo") -> List[Path]:
        """Write Monte-Carlo covariance results as text and JSON."""
        data = result.to_dict()
        data["used_beams"] = [int(i) for i in subset]
        data["axes"] = list(AXIS_LABELS[: result.matrix.shape[0]])
        return [
            self._write(f"{name}.txt", format_unconditional(result, subset)),
            self._write(f"{name}.json", self._json(data)),
        ]

    def list_outputs(self) -> List[Path]:
        """Files currently in the output directory, sorted by name."""
        return sorted(p for p in self.out_dir.iterdir() if p.is_file())
