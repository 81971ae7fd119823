from typing import Dict, List
import json
from pathlib import Path

import numpy as np
import pytest

import ddbounds as dd

SCENARIOS_FILE = Path(__file__).parent / "test_scenarios.json"
CONSTANTS_FILE = Path(__file__).parent / "test_constants.json"

with open(SCENARIOS_FILE) as f:
    data = json.load(f)
    SCENARIOS = data["SCENARIOS"]
    INVALID_SCENARIOS = data["INVALID_SCENARIOS"]
    SWEEP = data["SWEEP"]

with open(CONSTANTS_FILE) as f:
    data = json.load(f)
    BOUND_VALUES = data["BOUND_VALUES"]
    NORM_EXAMPLES = data["NORM_EXAMPLES"]
    PAULI_LABELS = data["PAULI_LABELS"]


# SCENARIOS

# Named scenario configuration, as it would appear in a scenario file
@pytest.fixture(scope="package", params=SCENARIOS, ids=[item["name"] for item in SCENARIOS])
def scenario_data(request) -> Dict:
    return request.param

@pytest.fixture(scope="package")
def scenario(scenario_data) -> dd.SimulationScenario:
    return dd.SimulationScenario.from_dict(scenario_data["config"])

# One cycle of the scenario, with the gate spread over scenario.m cycles
@pytest.fixture(scope="package")
def cycle(scenario) -> dd.CycleResult:
    return dd.run_cycle(scenario)

@pytest.fixture(scope="package")
def pdd(scenario) -> dd.PddResult:
    return dd.run_pdd(scenario)

@pytest.fixture(scope="package")
def distances(scenario, pdd) -> dd.StateDistances:
    rho_s, rho_b = dd.initial_states(scenario)
    return dd.final_state_distances(pdd, rho_s, rho_b)

# Scenarios with finite-width pulses only
@pytest.fixture(scope="package", params=[item for item in SCENARIOS if item["config"].get("delta", 0) > 0],
                ids=[item["name"] for item in SCENARIOS if item["config"].get("delta", 0) > 0])
def finite_width_cycle(request) -> dd.CycleResult:
    return dd.run_cycle(dd.SimulationScenario.from_dict(request.param["config"]))

# Invalid configuration with the expected error message pattern
@pytest.fixture(scope="package", params=INVALID_SCENARIOS, ids=[item["match"] for item in INVALID_SCENARIOS])
def invalid_scenario(request) -> Dict:
    return request.param

@pytest.fixture(scope="package")
def sweep_data() -> Dict:
    return SWEEP


# CONSTANTS AND CLOSED-FORM VALUES

@pytest.fixture(scope="package")
def consts() -> dd.BoundConstants:
    return dd.load_constants()

@pytest.fixture(scope="package", params=BOUND_VALUES)
def bound_value(request) -> Dict:
    return request.param

@pytest.fixture(scope="package", params=NORM_EXAMPLES, ids=[item["name"] for item in NORM_EXAMPLES])
def norm_example(request) -> Dict:
    return request.param

@pytest.fixture(scope="package", params=PAULI_LABELS)
def pauli_label(request) -> str:
    return request.param


# RANDOMNESS

@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)

@pytest.fixture(scope="package", params=[2, 3, 4, 8, 16])
def dim(request) -> int:
    return request.param

def complex_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))

@pytest.fixture
def random_matrices(rng, dim) -> List[np.ndarray]:
    return [complex_matrix(rng, dim) for _ in range(3)]
