"""Thermoacoustic tomography over a spherical aperture: exact forward
projection of ellipsoid phantoms and backprojection reconstruction."""

from .geometry import (
    QuadratureRule,
    RadialGrid,
    TransducerGrid,
    gauss_legendre,
    make_radial_grid,
    make_transducer_grid,
    trapezoid_periodic,
)
from .phantom import (
    Ellipsoid,
    Phantom,
    Volume,
    ball_projection_analytic,
    defrise_phantom,
    evaluate,
    voxelize,
)
from .forward import (
    ForwardConfig,
    monte_carlo_projection,
    project_ellipsoid,
    simulate,
)
from .sinogram import (
    ScanMask,
    Sinogram,
    apply_mask,
    make_mask,
    sample_radial,
    second_radial_derivative,
)
from .recon import (
    ReconConfig,
    backproject,
    discrete_laplacian,
    reconstruct,
    reconstruct_approx,
    reconstruct_fbp,
    reconstruct_rho_filtered,
)

__version__ = "0.1.0"
