''' Created: 11/09/2023 '''

# Internal Dependencies
from utilities.logger_formats import Log

class LatentExceptions:
    ''' Purpose: Stores all custom exception logic for project. '''
    class InvalidConfigFile(Exception):
        ''' Exception: Experiment JSON file was not valid. '''
        pass
    class BadSettings(Exception):
        ''' Exception: The settings.yml file has wrong type value. '''
        pass
    class ArgumentError(ValueError):
        ''' Exception: Operation called with mismatched shapes or invalid values. '''
        pass
    class StructuralError(Exception):
        ''' Exception: Graph support is cyclic where a DAG is required. '''
        pass
    class InternalError(Exception):
        ''' Exception: Numerical routine produced non-finite values. '''
        pass
    class UnsupportedPrimitive(Exception):
        ''' Exception: Loss could not be differentiated as written. '''
        pass
    class NonFiniteGradient(Exception):
        ''' Exception: Optimizer step rejected because a gradient was not finite. '''
        pass
    class Divergence(Exception):
        ''' Exception: ELBO estimate became non-finite during training. '''
        pass
    class DatasetFormatError(Exception):
        ''' Exception: Dataset container on disk disagrees with its metadata. '''
        pass
    class CheckpointMismatch(Exception):
        ''' Exception: Checkpoint was written under a different config hash. '''
        pass
    class OutputExists(Exception):
        ''' Exception: Output directory is not empty and force was not given. '''
        pass
    class MissingGroundTruth(Exception):
        ''' Exception: Metric needs ground truth that the dataset does not hold. '''
        pass
    def handle_non_critical(func, strict: bool, *args, **kwargs):
        ''' Purpose: Handles non-critical functions given the METRICS_STRICT setting.
            Only missing ground truth is tolerated, returning None if not strict. '''
        try:
            return func(*args, **kwargs)
        except LatentExceptions.MissingGroundTruth as e:
            Log.alert(f'Failed to get value!\n{e}')
            if strict:
                raise
            Log.warn(f'{getattr(func, "__name__", "value")} omitted, proceeding...')
            return None
    def handle_bad_step(func, *args, retries: int = 5, **kwargs):
        ''' Purpose: Whilst a single Monte-Carlo draw can produce a non-finite
            gradient, this retries the wrapped step (which must draw fresh noise
            per call) up to retries times before declaring divergence. '''
        fails = 0
        while True:
            try:
                return func(*args, **kwargs)
            except LatentExceptions.NonFiniteGradient as e:
                fails += 1
                Log.warn(f'Step rejected, retrying: {fails}')
                if fails >= retries:
                    raise LatentExceptions.Divergence(e)
