"""
Shared Helpers

Logging and configuration access used across the package.
"""

import json
import sys
from datetime import datetime
from multiprocessing import current_process
from typing import Callable

__all__ = [
    'CONFIG_FILE',
    'mklog',
    'get_config',
]

CONFIG_FILE = 'config.json'


def mklog(name: str = '') -> Callable:
    """
    :param name: logger name (defaults to the current process name)
    :return: log(msg) callable writing timestamped lines to stderr
    """
    name = name or current_process().name

    def log(msg: str = ''):
        print(f'[{datetime.now()}] {name}: {msg}', file=sys.stderr)

    return log


def get_config(filename: str = CONFIG_FILE) -> dict:
    with open(filename, 'r') as f:
        return json.load(f)
