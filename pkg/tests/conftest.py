import numpy as np
import pytest

from heli import (
    HelicopterParams,
    OutputWeights,
    SimArtifacts,
    build_output_map,
    design_reduced_observer,
    find_trim,
    linearize,
    synthesize,
)


@pytest.fixture(scope="session")
def params():
    return HelicopterParams()


@pytest.fixture(scope="session")
def trim(params):
    return find_trim(params)


@pytest.fixture(scope="session")
def plant(params, trim):
    return linearize(params, trim)


@pytest.fixture(scope="session")
def output_map():
    return build_output_map(OutputWeights.default())


@pytest.fixture(scope="session")
def synthesis(plant):
    result, search, report = synthesize(plant)
    return result, search, report


@pytest.fixture(scope="session")
def observer_design(plant):
    return design_reduced_observer(plant)


@pytest.fixture(scope="session")
def artifacts(trim, synthesis, observer_design):
    result, _, _ = synthesis
    return SimArtifacts(trim=trim, synthesis=result, observer=observer_design)


# scalar synthesis fixture used by several oracle tests: one state, one
# input, two controlled outputs (state then input), one disturbance channel
@pytest.fixture(scope="session")
def scalar_plant():
    a = np.array([[-1.0]])
    b = np.array([[1.0]])
    c = np.array([[1.0], [0.0]])
    d = np.array([[0.0], [1.0]])
    e = np.array([[1.0]])
    return a, b, c, d, e
