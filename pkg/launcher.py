''' Created: 13/09/2023 '''

# External Dependencies
from typing import List, Optional
import argparse
import inquirer
import os, sys

# Internal Dependencies
from experiment_controller import (cmd_generate, cmd_train, cmd_eval, cmd_sample_interventions,
                                   cmd_ablate_interventions)
from utilities.config_builder import ExperimentConfig
from utilities.logger_formats import Log
from utilities.settings import Settings
from utilities.custom_exceptions import LatentExceptions as LE

VERBS = ('generate', 'train', 'eval', 'sample-interventions', 'ablate-interventions')
EXPECTED_ERRORS = tuple(v for v in vars(LE).values() if isinstance(v, type) and issubclass(v, Exception)) + (FileNotFoundError,)

def list_filenames(directory: str, exclude: List[str] = [], include_extensions: bool = False) -> List[str]:
    ''' Returns: A list of strings of filenames for a specified directory,
        if include_extensions is true filenames include the filetype. Pass
        in exclude list to drop excluded options. Note, exclude check is
        done with extensions present. '''
    if not os.path.isdir(directory):
        return []
    filenames = sorted(f for f in os.listdir(directory) if f not in exclude)
    if not include_extensions:
        filenames = [os.path.splitext(filename)[0] for filename in filenames]
    return filenames

def prompt_options(options: List[str], prompt: str = None) -> str:
    ''' Returns: Selected user option str from prompted list of options.
        Pass in a prompt str to modify the prompt prompt user sees. '''
    if not options or not isinstance(options, list):
        raise LE.ArgumentError('Options should be a non-empty list.')
    if prompt is None:
        prompt = 'Please select an option:'
    questions = [
        inquirer.List('selection',
                      message=prompt,
                      choices=options,
                      )
    ]
    answer = inquirer.prompt(questions, raise_keyboard_interrupt=True)
    return answer['selection']

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='launcher.py', description='Latent causal structure experiments.')
    parser.add_argument('verb', choices=VERBS)
    parser.add_argument('--config', help='Experiment JSON, a path or a name under the config directory.')
    parser.add_argument('--out', help='Output directory for this verb.')
    parser.add_argument('--dataset', help='Dataset directory (train, eval, sample-interventions).')
    parser.add_argument('--run', help='Trained run directory (eval, sample-interventions).')
    parser.add_argument('--seed', '--seeds', dest='seeds', type=int, nargs='+', help='Seeds, overriding the config.')
    parser.add_argument('--jobs', type=int, help='Seed runs executed in parallel.')
    parser.add_argument('--force', action='store_true', help='Overwrite a non-empty output directory.')
    parser.add_argument('--metric-seed', type=int, default=0, help='Seed of the evaluation Monte-Carlo draws.')
    parser.add_argument('--n-sets', type=int, help='Unseen intervention sets (sample-interventions).')
    parser.add_argument('--samples-per-set', type=int, help='Samples per unseen set (sample-interventions).')
    return parser

def resolve_config(args: argparse.Namespace, settings: Settings) -> ExperimentConfig:
    config_file = args.config
    if config_file is None:
        options = list_filenames(settings.CONFIG_DIRECTORY, ['.gitignore'], True)
        if not options:
            raise LE.InvalidConfigFile(f'No available experiment configs. Create one at {settings.CONFIG_DIRECTORY} first.')
        config_file = prompt_options(options, 'Please select an experiment configuration')
    config = ExperimentConfig(config_file, settings.CONFIG_DIRECTORY)
    Log.info(f'Loaded {config.path} contents:\n{config.string()}')
    return config

def launch(args: argparse.Namespace, settings: Settings) -> str:
    ''' Returns: Directory written by the verb. '''
    config = resolve_config(args, settings)
    root = config.output_directory or os.path.join(settings.OUTPUT_DIRECTORY, config.name)
    seeds = args.seeds or config.seeds
    jobs = settings.DEFAULT_JOBS if args.jobs is None else args.jobs
    dataset = args.dataset or os.path.join(root, 'data')
    run = args.run or os.path.join(root, 'runs')
    if jobs < 1:
        raise LE.ArgumentError(f'--jobs must be at least 1, got {jobs}.')
    if args.verb == 'generate':
        return cmd_generate(config, args.out or dataset, seeds, args.force, settings)
    if args.verb == 'train':
        return cmd_train(config, dataset, args.out or run, seeds, jobs, args.force, settings)
    if args.verb == 'eval':
        return cmd_eval(args.out or run, dataset, seeds, args.metric_seed, args.force, settings)
    if args.verb == 'sample-interventions':
        return cmd_sample_interventions(run, dataset, args.n_sets or config.unseen_sets,
                                        args.samples_per_set or config.unseen_samples, seeds,
                                        args.out or os.path.join(root, 'interventions'), args.force, settings)
    return cmd_ablate_interventions(config, args.out or os.path.join(root, 'ablation'), seeds, jobs, args.force, settings)

def main(argv: Optional[List[str]] = None) -> int:
    ''' Returns: Process exit code. Failures print one machine-parsable line
        "error=<Class> message=<text>" on stderr. '''
    args = build_parser().parse_args(argv)
    settings = None
    try:
        Log.status(f'Preparing to {args.verb}...')
        settings = Settings()
        launch(args, settings)
        Log.status(f'{args.verb} executed successfully')
        return 0
    except KeyboardInterrupt:
        Log.alert('Keyboard interrupt, aborting...')
        return 130
    except EXPECTED_ERRORS as e:
        message = ' '.join(str(e.args[0] if e.args else e).split())
        print(f'error={type(e).__name__} message={message}', file=sys.stderr)
        if settings is not None and settings.LOG_TRACEBACKS:
            Log.trace(e.__traceback__)
        return 1
    except Exception as e:
        print(f'error={type(e).__name__} message={" ".join(str(e).split())}', file=sys.stderr)
        Log.trace(e.__traceback__)
        return 2

if __name__ == '__main__':
    sys.exit(main())
