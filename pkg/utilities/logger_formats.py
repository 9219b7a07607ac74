''' Creation Date: 09/11/2022 '''

# External Dependencies
from colorama import Fore, Style
from typing import Any, Dict
from tqdm import tqdm
import numpy as np
import traceback
import pprint
import sys

def tag(symbol: str, colour: str, label: str = '') -> str:
    ''' Returns: Grey bracketed symbol prefix, optionally followed by a coloured label. '''
    prefix = f'{Fore.LIGHTBLACK_EX}[{colour}{symbol}{Style.RESET_ALL}{Fore.LIGHTBLACK_EX}]{Style.RESET_ALL}'
    return f'{prefix} {colour}{label}{Style.RESET_ALL}' if label else prefix

def emit(prefix: str, message: str, stream=None, newline: bool = False) -> None:
    # tqdm.write keeps active progress bars intact; None resolves to stdout at call time.
    separator = '\n' if newline else ' '
    tqdm.write(f'{prefix}{separator}{Fore.LIGHTBLACK_EX}{message}{Style.RESET_ALL}', file=stream)

def format_value(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return f'{float(value):.4g}'
    return 'nan' if value is None else str(value)

class Log:
    ''' Purpose: Correctly format print messages given purpose. Warnings and
        failures go to stderr so stdout stays clean for metric lines. '''
    PREFIX_STATUS = f'[{Fore.GREEN}-{Style.RESET_ALL}]'
    PREFIX_INFO = tag('i', Fore.BLUE)
    PREFIX_METRIC = tag('#', Fore.MAGENTA)
    PREFIX_WARN = tag('*', Fore.CYAN, 'Warning:')
    PREFIX_ALERT = tag('!', Fore.RED, 'ALERT:')
    PREFIX_TRACE = tag('!', Fore.RED, 'TRACE:')
    PREFIX_DUMP = tag('*', Fore.RED, 'DUMP:')
    @staticmethod
    def status(message: str):
        ''' Format: [-] message '''
        tqdm.write(f'{Log.PREFIX_STATUS} {message}')
    @staticmethod
    def info(message: str):
        ''' Formats: [i] message '''
        emit(Log.PREFIX_INFO, message)
    @staticmethod
    def metric(record: Dict[str, Any]):
        ''' Formats: [#] key=value key=value, floats to 4 significant digits,
            missing values as nan. '''
        emit(Log.PREFIX_METRIC, ' '.join(f'{k}={format_value(v)}' for k, v in record.items()))
    @staticmethod
    def warn(message: str):
        ''' Format: [*] Warning: message '''
        emit(Log.PREFIX_WARN, message, sys.stderr)
    @staticmethod
    def alert(message: str):
        emit(Log.PREFIX_ALERT, message, sys.stderr)
    @staticmethod
    def trace(error_traceback):
        ''' Formats: [!] TRACE: trace on next line '''
        emit(Log.PREFIX_TRACE, ''.join(traceback.format_tb(error_traceback)), sys.stderr, newline=True)
    @staticmethod
    def dump(object):
        ''' Formats: [*] DUMP: dump on next line. Arrays are shown as lists. '''
        content = vars(object) if hasattr(object, '__dict__') else object
        if isinstance(content, dict):
            content = {k: v.tolist() if isinstance(v, np.ndarray) else v for k, v in content.items()}
        emit(Log.PREFIX_DUMP, pprint.pformat(content), sys.stderr, newline=True)
