"""Rounded Karhunen-Loeve transform approximations for first-order Markov signals."""
from .approximations import (
    CatalogEntry,
    IntegerTransform,
    ScaledTransform,
    builtin_catalog,
    catalog_entry,
    derive_catalog,
    lookup,
    orthogonalize,
    round_scaled,
)
from .codec import (
    CompressionReport,
    absorbed_quantization,
    compress_image,
    explicit_quantization,
    image_mse,
    image_mssim,
    image_psnr,
    rate_quality_sweep,
    transform_block_2d,
    zigzag_retain,
)
from .fast import FactorizedTransform, SparseFactor, apply_forward, factorization, operation_counts
from .markov import (
    EigenSolution,
    MarkovModel,
    autocorrelation_matrix,
    dct_matrix,
    klt_matrix,
    solve_eigenfrequencies,
)
from .metrics import (
    MetricsRecord,
    klt_mse,
    total_error_energy,
    transform_efficiency,
    unified_coding_gain,
)

__version__ = "0.1.0"
