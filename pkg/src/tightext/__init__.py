"""Tight Lipschitz extensions of vector-valued functions on weighted graphs.

The package solves the Dirichlet-type problem of extending values given on a
subset of graph nodes so that the extension is as "flat" as possible: scalar
data via the graph infinity-Laplacian fixed-point iteration, vector data by
minimizing power energies of the local Lipschitz constants with an ADMM
splitting, whose minimizers approach the unique tight extension as the
exponent grows.  Grid and patch-similarity pixel graphs turn the machinery
into local and nonlocal image inpainting.
"""

from .graph import (
    BoundaryProblem,
    GraphFormatError,
    LipschitzProfile,
    VertexFunction,
    WeightedGraph,
    is_tighter,
    lex_compare,
    lipschitz_profile,
    load_graph,
    local_lipschitz,
    read_graph,
    save_graph,
    write_graph,
)
from .harmonic import (
    IterationConfig,
    IterationReport,
    divergence_demo,
    divergence_example,
    extend_componentwise,
    extend_inf_harmonic,
    graph_inf_laplacian,
)
from .imaging import (
    ImageGrid,
    InpaintReport,
    InpaintStalled,
    PatchConfig,
    YUV_MATRIX,
    build_grid_graph,
    build_knn_graph,
    inpaint,
    load_masked_image,
    patch_distance,
    read_image,
    read_mask,
    rgb_to_yuv,
    write_image,
    write_mask,
    yuv_to_rgb,
)
from .oracle import OracleConfig, brute_force_Is, brute_force_prox, verify_tight
from .tight import (
    AdmmConfig,
    AdmmReport,
    BlockSystem,
    assemble,
    energy_Is,
    energy_logexp,
    least_squares_step,
    minimize_Is,
    prox_conj_group_maxnorm_pow,
    prox_group_maxnorm_pow,
    tight_extension,
)

__version__ = "0.1.0"
