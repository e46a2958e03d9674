__version__ = "0.1.0"

from conceptgraph_figures.artifact import ArtifactError, MatrixArtifact, load_artifact
from conceptgraph_figures.render import build_figure, render_heatmap

__all__ = [
    "ArtifactError",
    "MatrixArtifact",
    "load_artifact",
    "build_figure",
    "render_heatmap",
    "__version__",
]
