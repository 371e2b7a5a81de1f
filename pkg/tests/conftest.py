import numpy as np
import pytest

from building_voi.distributions import Categorical
from building_voi.gshp import GshpConfig
from building_voi.problem import (MEASURED, ActionSpace, DecisionProblem,
                                  Parameter, ParameterSchema)


def make_toy_problem():
    """Two actions, two equally likely states; EVPI is exactly 0.5"""
    schema = ParameterSchema(
        (Parameter('theta', Categorical([0., 1.], [0.5, 0.5]), MEASURED), ))

    def utility(action, values):
        theta = np.asarray(values['theta'], dtype=float)
        if action == 0:
            return np.zeros_like(theta)
        return 2 * theta - 1

    return DecisionProblem(name='toy',
                           actions=ActionSpace.from_payloads([0, 1]),
                           schema=schema,
                           utility=utility)


@pytest.fixture
def toy_problem():
    return make_toy_problem()


@pytest.fixture(scope='session')
def small_gshp_config():
    """Five-year horizon with three lengths, fast enough for unit tests"""
    return GshpConfig(lengths=(110., 150., 190.), lifetime=5)
