''' Created: 14/09/2023 '''

# External Dependencies:
from typing import Any, Dict, Tuple
import os

# Internal Dependencies:
from utilities.custom_exceptions import LatentExceptions as LE

# key: (accepted types, required)
EXPERIMENT_SCHEMA: Dict[str, Tuple[tuple, bool]] = {
    'name': ((str,), True),
    'd': ((int,), True),
    'D': ((int,), True),
    'degree': ((int,), True),
    'projection': ((str,), True),
    'n_obs': ((int,), True),
    'n_sets': ((int,), True),
    'samples_per_set': ((int,), True),
    'single_node': ((bool,), False),
    'intervention_std': ((int, float), False),
    'seeds': ((list,), True),
    'output_directory': ((str,), False),
    'oracle': ((bool,), False),
    'ablation_sets': ((list,), False),
    'unseen_sets': ((int,), False),
    'unseen_samples': ((int,), False),
    'epochs': ((int,), False),
    'lr': ((int, float), False),
    'batch_size': ((int,), False),
    'mode': ((str,), False),
    'sinkhorn_tau': ((int, float), False),
    'sinkhorn_iters': ((int,), False),
    'horseshoe_scale': ((int, float, type(None)), False),
    'sigma_prior_mean': ((int, float), False),
    'sigma_prior_std': ((int, float), False),
    'perm_kl_coefficient': ((int, float), False),
    'threshold': ((int, float), False),
    'clamp_interventions': ((bool,), False),
    'decoder': ((str,), False),
    'eval_interval': ((int,), False),
    'checkpoint_interval': ((int,), False),
    'posterior_samples': ((int,), False),
    'latent_samples': ((int,), False),
    'bad_step_retries': ((int,), False),
    'latent_estimator': ((str,), False),
    'fixed_permutation': ((list, type(None)), False),
}

class GenericValidators:
    ''' Purpose: Contains all generic validation logic. '''
    @staticmethod
    def validate_file_exists(file_path: str):
        ''' Purpose: Validates that file exists at given file_path. '''
        if not os.path.exists(file_path):
            raise FileNotFoundError(f'{file_path} does not exist.')
    @staticmethod
    def validate_type(key: str, value: Any, types: tuple):
        # bool is an int subclass, so compare exact types
        if type(value) not in types:
            names = ', '.join(t.__name__ for t in types)
            raise LE.InvalidConfigFile(f'The JSON "{key}" value must be of type {names}, got {type(value).__name__}.')
    @staticmethod
    def validate_json_structure(data: Dict):
        ''' Purpose: Validates experiment JSON is flat, has every required key,
            no unknown keys and correctly typed values. '''
        if not isinstance(data, dict):
            raise LE.InvalidConfigFile('Experiment JSON must be a single object.')
        unknown = sorted(set(data) - set(EXPERIMENT_SCHEMA))
        if unknown:
            raise LE.InvalidConfigFile(f'JSON contains unknown keys: {", ".join(unknown)}')
        for key, (types, required) in EXPERIMENT_SCHEMA.items():
            if key not in data:
                if required:
                    raise LE.InvalidConfigFile(f'JSON is missing the "{key}" key...')
                continue
            GenericValidators.validate_type(key, data[key], types)
    @staticmethod
    def validate_int_list(key: str, values: list, minimum: int = 0):
        if not values or any(type(v) is not int or v < minimum for v in values):
            raise LE.InvalidConfigFile(f'The JSON "{key}" value must be a non-empty list of integers >= {minimum}.')
    @staticmethod
    def validate_dimensions(d: int, D: int, projection: str, image_dim: int):
        ''' Purpose: Validates latent and observation sizes for the projection kind. '''
        if d < 2:
            raise LE.InvalidConfigFile(f'Config "d":{d} must be at least 2.')
        if d > D:
            raise LE.InvalidConfigFile(f'Config "d":{d} exceeds "D":{D}.')
        if projection == 'blocks' and D != image_dim:
            raise LE.InvalidConfigFile(f'Config "projection":"blocks" renders {image_dim} pixels, "D" must be {image_dim}.')
    @staticmethod
    def validate_choice(key: str, value: Any, choices: tuple):
        if value not in choices:
            raise LE.InvalidConfigFile(f'Config "{key}":{value} is not one of {choices}.')
    @staticmethod
    def validate_positive(key: str, value: float):
        if value is not None and value <= 0:
            raise LE.InvalidConfigFile(f'Config "{key}":{value} must be positive.')
