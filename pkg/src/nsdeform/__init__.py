"""Space deformation models for non-stationary random functions.

A non-stationary field observed once at scattered locations is mapped by a
smooth bijection onto a space where it is stationary and isotropic; kriging
and conditional simulation are then carried out through that map.
"""

import os as _os

# NSDEFORM_THREADS caps BLAS/OpenMP threads; it must be set before numpy loads
if _os.environ.get("NSDEFORM_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["NSDEFORM_THREADS"])

from ._kernels import BACKEND
from .dissimilarity import CompositeDissimilarity, NmdsWeights, composite, gamma_matrix, nmds_weights
from .kernel import VariogramCloud, epanechnikov, ns_variogram, variogram_cloud
from .nmds import nmds_fit, stress, weighted_isotonic_regression
from .pipeline import DeformationFit, fit_deformation, fit_stationary
from .prediction import (
    MeanModel,
    conditional_sim,
    krige_arrays,
    ordinary_kriging,
    unconditional_sim,
)
from .spatial import (
    AnchorSet,
    Dataset,
    DataError,
    GaugeTransform,
    anchor_grid,
    distance,
    minmax_scale,
    pairwise_distances,
)
from .tps import ThinPlateSpline, fold_check, sigma, tps_eval, tps_fit
from .tuning import HyperParams, cv1, cv2, score, select
from .variogram import (
    BasicStructure,
    MixtureVariogram,
    experimental_variogram,
    fit_mixture,
    gamma0_eval,
    gamma_ns,
)

__version__ = "0.1.0"
