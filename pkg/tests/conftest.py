import json
import math

import pytest

from calibration.free_evolution import CalibrationParams
from config import paths
from cooling.spectrum import CoolingParams
from core_model.system_config import load_config, save_config
from noise_budget.channels import full_budget


@pytest.fixture
def reference_config_path():
    """Path to the bundled reference configuration"""
    return paths.SYSTEM_CONFIG_FILE_PATH


@pytest.fixture
def reference_config(reference_config_path):
    """Reference configuration in pinned-omega mode"""
    return load_config(reference_config_path)


@pytest.fixture
def derived_config(reference_config):
    """Reference configuration with omega, I_rmax and lambda_max recomputed from geometry"""
    return reference_config.updated(omega_mode="derived")


@pytest.fixture
def config_file_path(reference_config, tmpdir):
    """ Fixture to save a copy of the reference configuration for testing"""
    config_path = str(tmpdir.join("system.cfg"))
    save_config(reference_config, config_path, header="copy of the reference configuration")
    return config_path


@pytest.fixture
def config_text():
    """A minimal configuration text with comments, blank lines and an unknown key"""
    with open(paths.SYSTEM_CONFIG_FILE_PATH, "r", encoding="utf-8") as file:
        text = file.read()
    return text + "\n# trailing comment\n\nlegacy_option = 3   # not a field\n"


@pytest.fixture
def run_settings():
    """Run settings with small grids so that sweeps and Monte Carlo finish quickly"""
    return {
        "seed_value": 11,
        "n_jobs": 1,
        "protocol": {"K": 4, "M_K": 2, "mu": 3, "trials": 40, "fidelity": 1.0, "offset_rule": "quadrature"},
        "cooling": {"coupling_hz": 1.0e4, "n_th_min": 1.0, "n_th_max": 1.0e9, "points": 7, "harmonics": 1},
        "wire_sweep": {"a_min": 0.2e-6, "a_max": 1.0e-6, "points": 5},
        "coupling_sweep": {
            "qubit_radius_min": 1.0e-6, "qubit_radius_max": 15.0e-6,
            "sphere_radius_min": 2.0e-6, "sphere_radius_max": 20.0e-6,
            "scale_min": 0.5, "scale_max": 10.0, "points": 15,
        },
        "calibration": {
            "qubit_splitting": 50.0, "trap_frequency": 1.0, "coupling": 0.3,
            "samples": 200, "shots": 10000, "span_periods": 300.0,
        },
    }


@pytest.fixture
def run_settings_file_path(run_settings, tmpdir):
    """ Fixture to create and save the run settings json"""
    settings_path = tmpdir.join("run_config.json")
    with open(settings_path, "w") as file:
        json.dump(run_settings, file)
    return str(settings_path)


@pytest.fixture
def design_specs():
    """Two-parameter geometry search space"""
    return {
        "num_trials": 4,
        "parameters": [
            {"name": "wire_radius", "type": "real", "search_type": "log-uniform",
             "range_low": 0.2e-6, "range_high": 1.5e-6},
            {"name": "qubit_radius", "type": "real", "search_type": "uniform",
             "range_low": 3.0e-6, "range_high": 7.0e-6},
        ],
    }


@pytest.fixture
def design_specs_file_path(design_specs, tmpdir):
    """ Fixture to save the geometry search space json"""
    specs_path = tmpdir.join("design_tuning.json")
    with open(specs_path, "w") as file:
        json.dump(design_specs, file)
    return str(specs_path)


@pytest.fixture
def calibration_params():
    """Scaled calibration parameters (omega_q, omega, lambda) in units of omega"""
    return CalibrationParams(qubit_splitting=50.0, trap_frequency=1.0, coupling=0.3)


@pytest.fixture
def cooling_params(reference_config):
    """Cooling operating point of the reference device, damped by its noise budget"""
    budget = full_budget(reference_config)
    return CoolingParams.from_config(
        reference_config, coupling_hz=1.0e4, resonator_damping=2.0 * math.pi * budget.total_rate_hz)
