"""Spatio-temporal graph scattering transform."""
from .graph import (
    Graph,
    ShiftKind,
    ShiftMatrix,
    build_graph_from_edges,
    build_line_graph,
    eigendecompose,
    flatten,
    kinect20_skeleton,
    make_shift,
    unflatten,
)
from .product import ProductKind, joint_fourier_basis, product, product_shift
from .scattering import (
    FeatureMap,
    Pooling,
    ScatteringConfig,
    build_banks,
    feature_dimension,
    scatter,
    scatter_joint,
    scatter_separable,
)
from .wavelets import (
    Family,
    FilterBank,
    PolynomialFilter,
    apply_joint,
    apply_separable,
    build_bank,
    build_geometric_bank,
    build_spectral_bank,
    estimate_frame_bounds,
    estimate_kernel_constants,
)

__version__ = "0.1.0"
