"""dvppsim: deterministic fixed-step simulation and control library for
coordinated fast frequency regulation in dynamic virtual power plants."""

from ._version import __version__
from .control import (DapiState, DelayBuffer, dapi_derivative, dapi_mismatch,
                      final_setpoint, local_setpoint)
from .dynamics import (OMEGA_N_DEFAULT, DvppInputs, FcrParams, bess_derivative,
                       dvpp_derivatives, fcr_response, sg_derivatives)
from .engine import (ControlOptions, EstimatorSetup, InertiaSwitch, Metrics,
                     OutputOptions, ScenarioSpec, SgTrip, Simulation,
                     SimulationTrace, StochasticSpec, UnmeasuredPowerStep,
                     certification_report, derived_metrics, run, settling_time,
                     summary_dict, unmeasured_power_dynamics)
from .errors import (ConfigError, NodeKindError, NumericFault, ParameterError,
                     ValidationError)
from .estimator import (AugmentedModel, EstimatorGains, ExoModel,
                        build_augmented, certify_gain, estimator_step,
                        power_estimate)
from .grid import (GridTopology, NodeKind, NodeParams, NodeState,
                   net_tie_line_injection, tie_line_flow)
from .config import (config_hash, dumps_scenario, load_scenario,
                     save_scenario, scenario_from_dict, scenario_to_dict)
from .presets import PRESET_NAMES, preset
from .signals import (RNG_ALGORITHM_ID, BmrConfig, BmrGenerator, PrbsConfig,
                      PrbsGenerator, RandomStream, bmr_series, bmr_step,
                      prbs_initial, prbs_series, prbs_step, substream_seed)

__all__ = [name for name in dir() if not name.startswith("_")]
