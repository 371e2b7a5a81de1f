from .model import (FLOOR_AREA_PER_PERSON, INFECTION_RATES,
                    InfectionModelConfig, OfficeConfig,
                    build_ventilation_problem, floor_area_family,
                    infection_probability, infection_rate_family,
                    occupancy_measurements, ventilation_cost,
                    ventilation_total_cost)
