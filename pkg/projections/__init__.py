''' Created: 03/10/2026 '''

# External Dependencies
from typing import Dict
import importlib
import os

PLUGIN_DIRECTORY = os.path.dirname(__file__)

def discover() -> Dict[str, str]:
    ''' Returns: Projection kind to module path for every plugin file declaring a Projection class. '''
    kinds = {}
    for file_name in sorted(os.listdir(PLUGIN_DIRECTORY)):
        if not file_name.endswith('.py') or file_name in ('__init__.py', 'BaseProjection.py'):
            continue
        module_name = f'{__name__}.{file_name[:-3]}'
        projection = getattr(importlib.import_module(module_name), 'Projection', None)
        if projection is not None:
            kinds[projection.kind] = module_name
    return kinds
