"""Heatmap rendering for composition and co-occurrence matrices."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LogNorm, Normalize

from conceptgraph_figures.artifact import ArtifactError, MatrixArtifact

COLOR_SCALES = ("linear", "log")
MARGIN_TOP = 3
CMAP = "viridis"

# keep SVG text as text elements so labels survive into the file
_RC = {"svg.fonttype": "none"}


def _norm(values: np.ndarray, color_scale: str):
    if color_scale == "linear":
        return Normalize(vmin=0.0, vmax=1.0), values
    positive = values[values > 0]
    vmin = float(positive.min()) if positive.size else 1e-6
    masked = np.ma.masked_less_equal(values, 0.0)
    return LogNorm(vmin=vmin, vmax=1.0), masked


def build_figure(artifact: MatrixArtifact, color_scale: str = "linear"):
    """Assemble the matplotlib figure; returns (figure, heatmap axes).

    Row and column label order follows the artifact (hence the CSV)
    exactly. For composition artifacts carrying annotations, the top
    concepts of each cluster are listed along the right margin.
    """
    if color_scale not in COLOR_SCALES:
        raise ArtifactError(
            f"color scale must be one of {COLOR_SCALES}, got {color_scale!r}"
        )
    n_rows, n_cols = artifact.shape
    if len(artifact.row_labels) != n_rows or len(artifact.col_labels) != n_cols:
        raise ArtifactError("label counts do not match the matrix dimensions")
    if artifact.annotations is not None and len(artifact.annotations) != n_rows:
        raise ArtifactError("one annotation list per matrix row is required")

    margin = artifact.annotations is not None
    width = max(4.0, 0.45 * n_cols + 2.0 + (2.8 if margin else 0.0))
    height = max(3.0, 0.45 * n_rows + 1.6)

    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(width, height), constrained_layout=True)
        norm, values = _norm(artifact.values, color_scale)
        cmap = plt.get_cmap(CMAP).copy()
        cmap.set_bad("#eeeeee")
        image = ax.imshow(values, cmap=cmap, norm=norm, aspect="auto")
        ax.set_xticks(range(n_cols), labels=artifact.col_labels, rotation=90)
        ax.set_yticks(range(n_rows), labels=artifact.row_labels)
        if artifact.kind == "composition":
            ax.set_xlabel("category")
            ax.set_ylabel("cluster")
        else:
            ax.set_xlabel("category")
            ax.set_ylabel("category")
        fig.colorbar(image, ax=ax, fraction=0.046, pad=0.04)
        if margin:
            twin = ax.twinx()
            twin.set_ylim(ax.get_ylim())
            twin.set_yticks(
                range(n_rows),
                labels=[
                    ", ".join(names[:MARGIN_TOP]) for names in artifact.annotations
                ],
                fontsize=8,
            )
            twin.tick_params(length=0)
    return fig, ax


def render_heatmap(
    artifact: MatrixArtifact,
    out_path: str | Path,
    color_scale: str = "linear",
) -> Path:
    """Render one artifact to `out_path`; format follows the extension."""
    fig, _ = build_figure(artifact, color_scale)
    out_path = Path(out_path)
    try:
        fig.savefig(out_path)
    finally:
        plt.close(fig)
    return out_path
