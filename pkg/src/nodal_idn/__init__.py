"""Forward and inverse Dirichlet-to-Neumann engine for nodal curves."""

from .model import (AdmissibleFamily, AnnulusDomain, BoundaryCurve, DiskDomain,
                    NodalDomainModel, finest_zero_sum_partition,
                    is_generic_family)
from .greens import (GreenKernel, NystromSystem, build_principal_green,
                     disk_green, layer_potential_T, solve_dirichlet_fredholm,
                     trace_T_minus, trace_T_plus)
from .dirichlet import (DNDatum, HarmonicDistribution, apply_dn,
                        build_dn_datum, compute_theta, solve_nodal_dirichlet,
                        verify_weak_holomorphy)
from .moments import (FiberWindow, MomentTable, ReconstructedCurve, WindowPlan,
                      compute_moment, eliminate_polynomial_part,
                      estimate_sheet_count, recover_fibers,
                      recover_form_quotient, sweep_windows)
from .nodes import (branch_residue, classify_and_partition,
                    dirichlet_energy_growth, locate_singularities)
from .characterize import (characterize, compute_G, green_identity_residual,
                           orientation_probe, shock_residual)
from .oracles import (RationalFunction, RationalMapOracle,
                      argument_principle_count, fd_laplacian_check,
                      fiber_oracle, polynomial_roots)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
