''' Created: 13/09/2023 '''

# NOTE: Do not modify this file, modify the settings.yml created on first use.

# External Dependencies
import os
import yaml

# Internal Dependencies
from utilities.logger_formats import Log
from utilities.custom_exceptions import LatentExceptions as LE

class Settings:
    ''' Purpose: Load and handle application settings '''

    def __init__(self, settings_yml_path: str = 'settings.yml'):

        # General configurable options:
        # Number of seed runs executed in parallel when --jobs is not given.
        self.DEFAULT_JOBS = 1  # Type: int, Default: 1
        # If true, training epochs and seed sweeps show tqdm progress bars.
        self.PROGRESS_BARS = True  # Type: bool, Default: True
        # If true, failures print a traceback after the one-line error.
        self.LOG_TRACEBACKS = False  # Type: bool, Default: False
        # If true, a metric that cannot be computed aborts evaluation.
        self.METRICS_STRICT = False  # Type: bool, Default: False
        # If true, every optimizer step checks parameters for non-finite values.
        self.FLOAT_CHECKS = True  # Type: bool, Default: True

        # Warning, avoid modifying the below options:
        # Location of experiment configuration JSON file directory.
        self.CONFIG_DIRECTORY = 'experiment_configs/'  # Type: str, Default: "experiment_configs/"
        # Directory location to save datasets, runs and reports to.
        self.OUTPUT_DIRECTORY = 'output_files/'  # Type: str, Default: "output_files/"

        # Load settings from settings.yml if it exists, or create it with default settings
        self.load_and_override_settings(settings_yml_path)

    def get_default_settings(self):
        return {k: v for k, v in self.__dict__.items() if not k.startswith('_')}

    def load_and_override_settings(self, settings_yml_path: str):
        default_settings = self.get_default_settings()
        if os.path.exists(settings_yml_path):
            with open(settings_yml_path, 'r') as file:
                yaml_content = yaml.safe_load(file) or {}
                for key, value in yaml_content.items():
                    if hasattr(self, key):
                        # bool is an int subclass, so compare exact types
                        default_value = getattr(self, key)
                        if type(value) is type(default_value):
                            setattr(self, key, value)
                        else:
                            raise LE.BadSettings(f"Type mismatch for setting {key}. Expected {type(default_value)}, but got {type(value)}.")
        else:
            Log.info('Creating new local settings.yml')
            with open(settings_yml_path, 'w') as file:
                yaml.dump(default_settings, file, default_flow_style=False)
