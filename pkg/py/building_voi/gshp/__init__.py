from .ground import (GroundKernel, GroundModelConfig, GshpSimulation,
                     heat_pump_cop, response_kernel, simulate_gshp)
from .load import LONDON_MONTHLY_TEMPERATURE, LoadProfile, synth_load_profile
from .model import (GROUND_TESTS, REFERENCE_DESIGN, GshpConfig,
                    build_gshp_problem, capital_cost, deterministic_optimum,
                    ground_test_measurements, gshp_lifetime_cost,
                    reference_comparison)
