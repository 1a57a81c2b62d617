import argparse
import sys

from cgrp import bench, generate, solve, validate
from cgrp.config import setup_logging

COMMANDS = {'gen': (generate, 'generate a dataset'),
            'solve': (solve, 'solve a single instance'),
            'bench': (bench, 'benchmark solvers on a dataset'),
            'validate': (validate, 'validate a tour against an instance')}


def main(argv=None):
    parser = argparse.ArgumentParser(prog='cgrp', description='Compositional geometry routing toolkit.')
    parser.add_argument('--verbose', action='store_true', default=False)
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name, (module, help) in COMMANDS.items():
        module.add_arguments(subparsers.add_parser(name, help=help))
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    sys.exit(COMMANDS[args.command][0].execute(args))


if __name__ == '__main__':
    main()
