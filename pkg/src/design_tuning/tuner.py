import math
from typing import Any, Callable, Dict, List, Union

import numpy as np
import pandas as pd
from skopt import gp_minimize
from skopt.space import Categorical, Integer, Real

from config import paths
from core_model.system_config import SystemConfig, config_to_dict
from estimation.sensitivity import sensitivity
from exceptions import ConvergenceError, DomainError, ScheduleInfeasibleError
from inductance_coupling.coupling import achievable_displacement, lambda_schedule
from utils import get_logger, read_json_as_dict, save_dataframe_as_csv

logger = get_logger(__name__)

INFEASIBLE_SCORE = 1.0e6


def design_objective(cfg: SystemConfig, geometry: Dict[str, float]) -> float:
    """
    Error-corrected per-root-Hz Delta g / g of a geometry.

    The geometry runs in derived mode with l_max limited to what the qubit can produce
    at its critical current, and the coupling ladder must fit under the cap.
    """
    point = cfg.updated(omega_mode="derived", **geometry)
    point = point.updated(max_displacement=achievable_displacement(point))
    lambda_schedule(point)
    return sensitivity(point).corrected_prhz


class DesignTuner:
    """Scikit-Optimize search over resonator and qubit geometry.

    Args:
        base_config (SystemConfig): Configuration whose other fields stay fixed.
        tuning_specs (Dict[str, Any]): Search-space spec (``num_trials``, ``parameters``).
        results_file_path (str): Path to the trial history CSV.
    """
    def __init__(
        self,
        base_config: SystemConfig,
        tuning_specs: Dict[str, Any],
        results_file_path: str,
    ):
        self.base_config = base_config
        self.tuning_specs = tuning_specs
        self.results_file_path = results_file_path
        self.num_trials = tuning_specs.get("num_trials", 20)
        if self.num_trials < 2:
            raise ValueError("Scikit-Optimize minimizer needs at least 2 trials")

        self.parameter_names = [p["name"] for p in self.tuning_specs["parameters"]]
        defaults = config_to_dict(base_config)
        unknown = [name for name in self.parameter_names if name not in defaults]
        if unknown:
            raise ValueError(f"Design parameters are not config fields: {unknown}")
        self.default_values = [defaults[name] for name in self.parameter_names]
        self.search_space = self.get_search_space()

    def _get_objective_func(self) -> Callable:
        def objective_func(trial):
            """Scores one geometry; infeasible or failed points get a large value."""
            geometry = dict(zip(self.parameter_names, trial))
            try:
                score = design_objective(self.base_config, geometry)
            except (DomainError, ScheduleInfeasibleError, ConvergenceError) as exc:
                logger.debug("infeasible geometry %s: %s", geometry, exc)
                return INFEASIBLE_SCORE
            if np.isnan(score) or math.isinf(score):
                return INFEASIBLE_SCORE
            return score

        return objective_func

    def get_search_space(self) -> List[Union[Categorical, Integer, Real]]:
        """Builds the skopt dimensions from the tuning specs.

        Returns:
            List[Union[Categorical, Integer, Real]]: One dimension per parameter.
        """
        space = []
        space_map = {
            ('categorical', None): Categorical,
            ('int', 'uniform'): lambda low, high, name: Integer(low, high, prior='uniform', name=name),
            ('int', 'log-uniform'): lambda low, high, name: Integer(low, high, prior='log-uniform', name=name),
            ('real', 'uniform'): lambda low, high, name: Real(low, high, prior='uniform', name=name),
            ('real', 'log-uniform'): lambda low, high, name: Real(low, high, prior='log-uniform', name=name)
        }
        for spec in self.tuning_specs["parameters"]:
            constructor = space_map.get((spec["type"], spec.get("search_type")))
            if constructor is None:
                raise ValueError(
                    f"Error creating design search space. Undefined value type: {spec['type']} "
                    f"or search_type: {spec.get('search_type')}. Verify the design tuning spec.")
            if spec["type"] == 'categorical':
                space.append(constructor(spec['categories'], name=spec['name']))
            else:
                space.append(constructor(spec['range_low'], spec['range_high'], name=spec['name']))
        return space

    def run_design_tuning(self) -> Dict[str, Any]:
        """Runs the Bayesian optimisation and saves the trial history.

        Returns:
            Dict[str, Any]: Best geometry found, by parameter name.
        """
        # a third of the trials explore the space first, at most 5
        n_initial_points = max(1, min(self.num_trials // 3, 5))
        optimizer_results = gp_minimize(
            func=self._get_objective_func(),
            dimensions=self.search_space,
            x0=self.default_values,
            acq_func="EI",
            n_initial_points=n_initial_points,
            n_calls=self.num_trials,
            random_state=0,
        )
        self.save_tuning_results(optimizer_results)
        best = self.get_best_geometry(optimizer_results)
        logger.info("best geometry %s, corrected sensitivity %.4g /sqrt(Hz)",
                    best, float(np.min(optimizer_results.func_vals)))
        return best

    def get_best_geometry(self, optimizer_results: Any) -> Dict[str, Any]:
        best_idx = int(np.argmin(optimizer_results.func_vals))
        return dict(zip(self.parameter_names, optimizer_results.x_iters[best_idx]))

    def save_tuning_results(self, optimizer_result: Any) -> pd.DataFrame:
        """Writes every trial, best first, with its 1-based trial number."""
        results = pd.concat([
            pd.DataFrame(optimizer_result.x_iters),
            pd.Series(optimizer_result.func_vals),
        ], axis=1)
        results.columns = self.parameter_names + ["corrected_prhz"]
        results.insert(0, "trial_num", 1 + np.arange(results.shape[0]))
        results.sort_values(by="corrected_prhz", inplace=True, ignore_index=True)
        save_dataframe_as_csv(results, self.results_file_path)
        return results


def tune_design(
    base_config: SystemConfig,
    results_file_path: str = paths.DESIGN_RESULTS_FILE_PATH,
    tuning_specs_file_path: str = paths.DESIGN_TUNING_CONFIG_FILE_PATH,
    num_trials: int = None,
) -> Dict[str, Any]:
    """
    Searches the geometry minimising the error-corrected per-root-Hz sensitivity.

    Args:
        base_config (SystemConfig): Starting configuration; its geometry is the first trial.
        results_file_path (str, optional): Trial history CSV.
        tuning_specs_file_path (str, optional): JSON search-space spec.
        num_trials (int, optional): Overrides ``num_trials`` of the tuning specs.

    Returns:
        Dict[str, Any]: Best geometry.
    """
    specs = read_json_as_dict(tuning_specs_file_path)
    if num_trials is not None:
        specs = {**specs, "num_trials": num_trials}
    tuner = DesignTuner(base_config=base_config, tuning_specs=specs, results_file_path=results_file_path)
    return tuner.run_design_tuning()
