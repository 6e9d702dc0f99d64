"""Normally distributed QMC point sets via sphere lifting, closed-form
spherical-cone discrepancies, and option-pricing experiments."""

from .errors import (SphereconeError, DomainError, InfiniteResultError,
                     ConfigurationError, ExhaustionError, NumericError)
from .lds import DirectionNumberTable, SobolStream, sobol_block
from .spheremap import (SpacePoint, SpacePoints, RadialShells,
                        SpherePartition, map_to_sphere, lift_to_space,
                        cap_measure, radial_shells, equal_area_partition_s2,
                        stratified_sample)
from .wce import (KernelParams, SphereConstants, WceReport, sphere_constants,
                  kernel_K, w_kr_psi, w_kernel, wce_nakagami,
                  wce_isotropic_general, mc_cone_discrepancy_oracle,
                  wce_sphere_cap, rms_wce_iid, rms_wce_fixed_directions,
                  expected_wce_sq_permutation, radial_discrepancy,
                  stratified_expected_wce_sq, lambda_k)
from .finance import (OptionSpec, PathConstruction, PriceEstimate,
                      brownian_transform, normal_vectors, price_option,
                      mc_reference_price, experiment_table)

__version__ = "0.1.0"
