''' Created: 03/10/2026 '''

# External Dependencies
import importlib

# Internal Dependencies
from projections.BaseProjection import BaseProjection
from utilities.custom_exceptions import LatentExceptions as LE
import projections

PROJECTION_KINDS = ('linear', 'mlp3', 'blocks')

class ProjectionBuilder:
    @staticmethod
    def module_name(kind: str) -> str:
        ''' Returns: Module path of the plugin implementing a projection kind. '''
        return projections.discover().get(kind, f'projections.{kind.capitalize()}')
    @staticmethod
    def build(kind: str) -> BaseProjection:
        ''' Returns: Constructed instance of the kind's Projection class.
            Builds selected projection, which inherits additional logic from BaseProjection. '''
        if kind not in PROJECTION_KINDS:
            raise LE.InvalidConfigFile(f'Config "projection":{kind} is not a valid projection...')
        module_name = ProjectionBuilder.module_name(kind)
        try:
            module = importlib.import_module(module_name)
        except ImportError:
            raise LE.InvalidConfigFile(f'Config "projection":{kind} has no module {module_name}...')
        if not hasattr(module, 'Projection'):
            raise LE.InvalidConfigFile(f'Module {module_name} does not contain required class Projection.')
        try:
            instance = module.Projection()
        except TypeError as e:
            raise LE.InvalidConfigFile(e)
        if instance.kind != kind:
            raise LE.InvalidConfigFile(f'Module {module_name} declares kind {instance.kind}, expected {kind}.')
        return instance
