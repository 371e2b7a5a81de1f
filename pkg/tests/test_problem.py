import numpy as np
import pytest

from building_voi.distributions import Degenerate, Gaussian, TruncatedGaussian
from building_voi.errors import ProblemError
from building_voi.problem import (MEASURED, NUISANCE, ActionSpace,
                                  DecisionProblem, MeasurementModel,
                                  Parameter, ParameterSchema, ScenarioSample,
                                  evaluate_utility, validate_measurement,
                                  validate_problem)
from building_voi.ventilation import build_ventilation_problem


def test_action_space_labels():
    space = ActionSpace.from_payloads([110., 115., 120.], unit='m')
    assert space.labels == ['110', '115', '120']
    assert space.index_of('115') == 1
    assert space.check(2) == 2
    with pytest.raises(KeyError):
        space.index_of('125')
    for bad in (3, -1, True, 1.0):
        with pytest.raises(ProblemError):
            space.check(bad)


def test_duplicate_labels_are_violations():
    space = ActionSpace.from_payloads([1.0, 1.00001], fmt='{:.1f}')
    assert any('labels unique' in v for v in space.violations())


def test_schema_roles():
    schema = ParameterSchema((
        Parameter('a', Gaussian(0, 1), MEASURED),
        Parameter('b', Gaussian(0, 1), NUISANCE),
    ))
    assert schema.measured == ['a']
    assert schema.nuisance(exclude='a') == ['b']
    assert not schema.finite_support
    with pytest.raises(ProblemError, match='no parameter'):
        schema.get('c')
    two = ParameterSchema((
        Parameter('a', Gaussian(0, 1), MEASURED),
        Parameter('b', Gaussian(0, 1), MEASURED),
    ))
    assert two.violations()


def test_evaluate_utility(toy_problem):
    assert evaluate_utility(toy_problem, 1, {'theta': 1.}) == 1.
    assert evaluate_utility(toy_problem, 0, {'theta': 1.}) == 0.
    with pytest.raises(ProblemError):
        evaluate_utility(toy_problem, 2, {'theta': 1.})
    with pytest.raises(ProblemError, match='missing'):
        evaluate_utility(toy_problem, 0, {})
    with pytest.raises(ProblemError, match='outside'):
        evaluate_utility(toy_problem, 0, {'theta': 1., 'other': 2.})


@pytest.mark.parametrize('occupancy', [5000.5, 50.5, -1., 101.])
def test_evaluate_utility_rejects_values_off_the_support(occupancy):
    problem = build_ventilation_problem()
    with pytest.raises(ProblemError, match='outside the prior support'):
        evaluate_utility(problem, 0, {'occupancy': occupancy})


@pytest.mark.parametrize('value', [np.nan, np.inf, 'many'])
def test_evaluate_utility_rejects_non_numbers(toy_problem, value):
    with pytest.raises(ProblemError):
        evaluate_utility(toy_problem, 0, {'theta': value})


def test_evaluate_utility_matches_vectorized_utility():
    problem = build_ventilation_problem()
    for a in range(len(problem.actions)):
        u = problem.utility(a, {'occupancy': np.array([0., 37., 100.])})
        assert evaluate_utility(problem, a, {'occupancy': 37}) == \
            pytest.approx(u[1], rel=1e-14)


def test_scenario_sample():
    schema = ParameterSchema((
        Parameter('a', TruncatedGaussian(0.01, 0.25, lower=0.), MEASURED),
        Parameter('b', Gaussian(0, 1), NUISANCE),
    ))
    sample = ScenarioSample({'a': 0.2, 'b': np.float32(-3)}, schema)
    assert dict(sample) == {'a': 0.2, 'b': -3.}
    assert len(sample) == 2
    assert sample.arrays()['a'].shape == (1, )
    assert evaluate_utility(
        DecisionProblem(name='sum',
                        actions=ActionSpace.from_payloads([0]),
                        schema=schema,
                        utility=lambda a, v: v['a'] + v['b']), 0,
        sample) == pytest.approx(-2.8)
    with pytest.raises(ProblemError, match='outside the prior support'):
        ScenarioSample({'a': -0.1, 'b': 0.}, schema)
    assert ScenarioSample({'c': 1.})['c'] == 1.


def test_validate_problem_ok(toy_problem):
    report = validate_problem(toy_problem)
    assert report.ok, report.violations


def _problem(utility):
    return DecisionProblem(
        name='toy',
        actions=ActionSpace.from_payloads([0, 1]),
        schema=ParameterSchema((Parameter('x', Gaussian(0., 1.)), )),
        utility=utility)


def test_validate_problem_flags_non_finite_utility():

    def utility(action, values):
        return np.where(values['x'] > 2, np.nan, 0.) if action else \
            np.zeros_like(values['x'])

    report = validate_problem(_problem(utility))
    assert not report.ok
    assert any('not finite' in v for v in report.violations)


def test_validate_problem_flags_nondeterminism():
    calls = []

    def utility(action, values):
        calls.append(1)
        return np.full_like(values['x'], len(calls), dtype=float)

    report = validate_problem(_problem(utility))
    assert any('not deterministic' in v for v in report.violations)


def test_validate_problem_never_raises():

    def utility(action, values):
        raise RuntimeError('broken model')

    report = validate_problem(_problem(utility))
    assert any('broken model' in v for v in report.violations)


def test_measurement_noise():
    trt = MeasurementModel('conductivity', 'trt', 5000., relative_noise=0.05)
    assert trt.noise_scale(2.0) == pytest.approx(0.10)
    assert trt.likelihood(2.0) == Gaussian(2.0, 0.1)
    perfect = MeasurementModel('conductivity', 'perfect')
    assert perfect.is_perfect
    assert perfect.likelihood(2.0) == Degenerate(2.0)
    with pytest.raises(ProblemError):
        MeasurementModel('x', 'bad', cost=-1)


def test_validate_measurement(toy_problem):
    good = MeasurementModel('theta', 'noisy', absolute_noise=0.3)
    assert validate_measurement(toy_problem, good).ok
    wrong = MeasurementModel('other', 'noisy', absolute_noise=0.3)
    assert not validate_measurement(toy_problem, wrong).ok
