"""One-dimensional coupled light/condensate simulator.

Weak probe and strong coupling beams propagate through an elongated
two-component condensate in the quasi-static limit; the matter evolves
under coupled GP equations with light-mediated transfer between the two
stable internal states.  Covers ultra-slow pulse propagation, stopping and
reviving probe pulses, long dark storage of two-component dynamics, and
fidelity metrics for the revived field.
"""

from .config import (ExperimentConfig, dump_config, parse_config,
                     parse_quantity, resolve_species_defaults)
from .darkbasis import (coupling_coefficients, dark_propagation,
                        from_dark_absorbed, to_dark_absorbed, z_critical)
from .engine import Diagnostics, RunResult, analyze, run, solve_ground, sweep
from .errors import (AnalysisError, ConfigError, NumericalError,
                     SlowlightError)
from .fields import (Grid1D, LightFields, SpinorWavefunction,
                     ThreeLevelWavefunction, read_snapshot, write_snapshot)
from .groundstate import imaginary_time_relax, thomas_fermi, tf_radius
from .lightprop import (BoundaryDrive, group_velocity,
                        integrate_light_adiabatic,
                        integrate_light_three_level)
from .matterstep import (StepperConfig, evolve_storage, gpe_energy,
                         step_three_level, step_two_level)
from .params import (PhysicalParams, UnitSystem, absorption_coefficient,
                     internal_params, optical_density)
from .revival import (FidelityReport, RevivedProbePrediction,
                      bandwidth_transmission, ideal_revived_probe,
                      map_output_to_space, minimum_pulse_duration,
                      state_length_scale, write_error)
from .scenarios import (PRESETS, PulseSpec, SwitchSchedule,
                        TestWavefunctionSpec, build_test_wavefunctions,
                        erf_switch_drive, gaussian_probe_drive, preset)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
