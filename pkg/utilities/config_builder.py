''' Created: 11/09/2023 '''

# Stores ExperimentConfig, class that builds all configuration for an experiment.

# External Dependencies
from dataclasses import fields
from typing import Dict, List, Optional
import hashlib
import json
import os
import yaml

# Internal Dependencies
from core.synth_gen import ER_DEGREES, INTERVENTION_STD
from core.trainer import MODES, TrainConfig
from core.decoder import DECODER_KINDS
from projections.Blocks import IMAGE_SIDE
from utilities.generic_validators import GenericValidators
from utilities.projection_builder import PROJECTION_KINDS, ProjectionBuilder
from utilities.custom_exceptions import LatentExceptions as LE

TRAIN_KEYS = tuple(f.name for f in fields(TrainConfig) if f.name != 'seed')
ABLATION_SETS = [2, 5, 10, 20]

class ExperimentConfig:
    ''' Purpose: Load and validate an experiment JSON document. '''
    def __init__(self, config_file: str, config_directory: str = 'experiment_configs/'):
        config_path = config_file if os.path.exists(config_file) else os.path.join(config_directory, config_file)
        if not config_path.endswith('.json') and not os.path.exists(config_path):
            config_path = f'{config_path}.json'
        GenericValidators.validate_file_exists(config_path)
        self.path = config_path
        with open(config_path, 'r') as file:
            try:
                data = json.load(file)
            except json.JSONDecodeError as e:
                raise LE.InvalidConfigFile(f'{config_path} is not valid JSON: {e}')
        self.load(data)

    @classmethod
    def from_dict(cls, data: Dict) -> 'ExperimentConfig':
        config = cls.__new__(cls)
        config.path = None
        config.load(dict(data))
        return config

    def load(self, data: Dict):
        GenericValidators.validate_json_structure(data)
        self.document = data
        self.name = data['name']
        self.d, self.D = data['d'], data['D']
        self.degree = data['degree']
        self.projection = data['projection']
        self.n_obs, self.n_sets, self.samples_per_set = data['n_obs'], data['n_sets'], data['samples_per_set']
        self.single_node = data.get('single_node', False)
        self.intervention_std = float(data.get('intervention_std', INTERVENTION_STD))
        self.seeds = data['seeds']
        self.output_directory = data.get('output_directory')
        self.oracle = data.get('oracle', False)
        self.ablation_sets = data.get('ablation_sets', ABLATION_SETS)
        self.unseen_sets = data.get('unseen_sets', 10)
        self.unseen_samples = data.get('unseen_samples', 200)
        GenericValidators.validate_choice('projection', self.projection, PROJECTION_KINDS)
        GenericValidators.validate_choice('degree', self.degree, ER_DEGREES)
        GenericValidators.validate_choice('mode', data.get('mode', 'fixed_ordering'), MODES)
        GenericValidators.validate_dimensions(self.d, self.D, self.projection, IMAGE_SIDE * IMAGE_SIDE)
        GenericValidators.validate_int_list('seeds', self.seeds)
        GenericValidators.validate_int_list('ablation_sets', self.ablation_sets, minimum=1)
        for key in ('n_sets', 'samples_per_set', 'unseen_sets', 'unseen_samples', 'epochs', 'lr', 'sinkhorn_tau',
                    'sinkhorn_iters', 'sigma_prior_std', 'threshold', 'horseshoe_scale', 'posterior_samples', 'latent_samples'):
            GenericValidators.validate_positive(key, data.get(key))
        if self.n_obs < 0:
            raise LE.InvalidConfigFile(f'Config "n_obs":{self.n_obs} must not be negative.')
        self.train_settings = {k: data[k] for k in TRAIN_KEYS if k in data}
        self.train_settings.setdefault('decoder', ProjectionBuilder.build(self.projection).decoder_kind)
        GenericValidators.validate_choice('decoder', self.train_settings['decoder'], DECODER_KINDS)
        try:
            self.train_config(self.seeds[0])
        except LE.ArgumentError as e:
            raise LE.InvalidConfigFile(f'Config training settings rejected: {e}')

    def train_config(self, seed: int, fixed_permutation: Optional[List[int]] = None, **overrides) -> TrainConfig:
        ''' Returns: TrainConfig for one seed. The document's fixed_permutation wins
            over the given one. '''
        settings = dict(self.train_settings, seed=seed, **overrides)
        if settings.get('fixed_permutation') is None and fixed_permutation is not None:
            settings['fixed_permutation'] = [int(v) for v in fixed_permutation]
        return TrainConfig(**settings)

    def hash(self) -> str:
        ''' Returns: sha256 of the canonical document, tying outputs to inputs. '''
        return hashlib.sha256(yaml.safe_dump(self.document, sort_keys=True).encode('utf-8')).hexdigest()

    def string(self) -> str:
        ''' Returns: String of the document's key value pairs. '''
        return '\n'.join(f'{k}: {v}' for k, v in sorted(self.document.items()))
