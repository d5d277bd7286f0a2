"""Time-harmonic elastic scattering by a compactly supported potential,
solved with a trigonometric collocation scheme on a periodic grid."""

__version__ = "0.1.0"

from .errors import (ConfigError, ConvergenceError, DomainError, ElastoScatterError,
                     GridError, InvalidCutoffError, InvalidMaterialError, LayoutError,
                     NumericFaultError, SupportError, WaveError)
from .special import BesselQuad, bessel_j, bessel_quad, bessel_y, hankel1
from .green import (CutoffSpec, GreenMatrix, LameParams, cutoff_psi, green_tensor,
                    green_tensor_field, origin_weight, phi_pair, phi_pair_2d, phi_pair_3d,
                    truncated_kernel, wavenumbers)
from .grid import (DEFAULT_ORIGIN, GridSpec, KernelSpectrum, NodalVectorField,
                   SpectralVectorField, build_grid, build_kernel_spectrum, convolve,
                   decay_report, decay_statistic, from_spectral, interpolate,
                   spectrum_of_kernel, to_spectral)
from .fields import (IncidentWave, ManufacturedCase, Potential, apply_potential,
                     eval_incident, experiment2_potential, experiment2_q, load_potential,
                     manufactured_case, plane_wave_2d, plane_wave_3d, sample_incident)
from .solver import (ConvergenceRow, SolveResult, SolverConfig, apply_system, build_rhs,
                     convergence_study, dense_assemble, evaluate_exterior, iterative_solve,
                     manufactured_errors, solve_scattering, solve_system)
from .scattering import (AmplitudeRecord, Selector, Sinogram, amplitude_records,
                         directions_2d, directions_3d, far_field, far_field_naive, observation_angles, read_amplitude_csv,
                         sinogram, write_amplitude_csv)
