"""Phase-space dynamics of prey-predator Hamiltonians.

Classical orbits and closed-form periods for the Lotka-Volterra and
Toda-like models, thermal (canonical) ensembles with quadratic-order
quantum corrections, and exact Gaussian-ensemble Wigner currents with
stagnation/circulation analysis and semiclassical trajectories.
"""

from .classical import (OrbitSpec, TodaClosedForm, Trajectory,
                        constraint_residual, hamilton_rhs, integrate_orbit,
                        orbit_period, return_to_start, toda_closed_period,
                        toda_parametric_T, toda_species_analytic)
from .errors import (DomainError, NumericalError, UsageError, ValidityError,
                     WignerFlowError)
from .fieldgrid import FieldGrid, GridSpec, export_table, sample_field, zero_contours
from .gaussian import (FlowSample, GaussianEnsembleParams, StagnationPoint,
                       circulation_number, currents_closed,
                       div_currents_closed, find_stagnation_points,
                       flow_sample, gaussian_w, integrate_quantum_trajectory,
                       liouville_div_w, purity, series_currents,
                       stationarity_div_j, velocity_w, vorticity)
from .model import (HamiltonianKind, PhasePoint, SeparableHamiltonian,
                    SpeciesPair, energy, harmonic_residual, odd_derivative,
                    species_from_phase)
from .specfun import (EllipticConvention, QuadratureSpec, bessel_k,
                      elliptic_k_complete, elliptic_k_linear_sin, erf_complex,
                      faddeeva_w, hermite_odd, im_erf_offset,
                      im_erf_offset_scaled, integrate_1d, jacobi_sn)
from .thermo import (ThermalEnsembleParams, ThermalObservables, beta_star,
                     currents_td, div_w_td, epsilon_correction, observables,
                     w0, w_st2, z0_closed, z_st_closed)

__version__ = "0.1.0"
