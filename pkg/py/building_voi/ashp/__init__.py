from .model import (AshpParams, ashp_annual_cost, build_ashp_problem,
                    maintenance_uplift, smart_meter)
