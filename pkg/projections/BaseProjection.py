''' Created: 03/10/2026 '''

# External Dependencies
import numpy as np
from abc import ABC, abstractmethod
from typing import Dict

# Internal Dependencies
from utilities.custom_exceptions import LatentExceptions as LE

class BaseProjection(ABC):
    ''' Base class for projection-kind specific generators of low-level data. '''

    # Expected sibling Projection class values:
    kind: str
    ''' kind: Name used for this projection in experiment configs and metadata. '''
    decoder_kind: str
    ''' decoder_kind: Decoder family paired with this projection during training. '''

    # Expected sibling Projection class functions:
    @abstractmethod
    def sample_params(self, d: int, D: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        ''' Returns: Freshly drawn projection parameters for d latents and D outputs. '''
    @abstractmethod
    def apply(self, z: np.ndarray, params: Dict[str, np.ndarray]) -> np.ndarray:
        ''' Returns: Observations of shape (..., D) for latents of shape (..., d). '''

    # Sibling instance inherited BaseProjection class methods:
    def observation_dim(self, d: int, D: int) -> int:
        ''' Returns: Length of a flattened observation. '''
        return D
    def validate_latents(self, z: np.ndarray, params: Dict[str, np.ndarray], d: int) -> None:
        if np.asarray(z).shape[-1] != d:
            raise LE.ArgumentError(f'{self.kind} projection expects {d} latents, got shape {np.asarray(z).shape}.')

    # Enforce BaseProjection class attributes and abstract methods in sibling class:
    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        check_required_class_attributes(BaseProjection, cls)
        check_required_abstract_methods(BaseProjection, cls)

def check_required_class_attributes(base_class, sub_class):
    ''' Purpose: Validates that sibling of given class contains all class level attributes. '''
    for attr in (k for k in base_class.__annotations__ if not k.startswith('_')):
        if getattr(sub_class, attr, None) is None:
            raise NotImplementedError(f'Class {sub_class.__name__} must define the {attr} class variable.')

def check_required_abstract_methods(base_class, sub_class):
    abstract_methods = base_class.__abstractmethods__
    for method in abstract_methods:
        if not callable(getattr(sub_class, method, None)):
            raise NotImplementedError(f'"{sub_class.__name__}" class needs to implement the "{method}" abstract method.')
