import argparse
import json
import logging
import sys

from cgrp.config import setup_logging
from cgrp.cost.model import CostModel, evaluate_tour, validate_tour
from cgrp.data.dataset import load_instance, load_tour
from cgrp.errors import CGRPError, error_payload


def run(instance, tour):
    """Check a tour file against an instance file and print the verdict as JSON.

    Returns:
        Dictionary with ``ok``, ``objective`` (None for invalid tours) and the list of ``violations``.
    """
    model = CostModel.from_instance(load_instance(instance))
    result = validate_tour(load_tour(tour), model.cs)
    verdict = result.to_dict()
    verdict['objective'] = evaluate_tour(load_tour(tour), model.cs, model.cm) if result.ok else None
    if not result.ok:
        logging.warning('Invalid tour %s: %d violations' % (tour, len(result.violations)))
    print(json.dumps(verdict))
    return verdict


def add_arguments(parser):
    parser.add_argument('instance', type=str, help='instance file')
    parser.add_argument('tour', type=str, help='tour file')


def execute(args):
    try:
        verdict = run(args.instance, args.tour)
    except CGRPError as e:
        logging.error(str(e))
        print(json.dumps(error_payload(e)))
        return 2
    return 0 if verdict['ok'] else 2


def main(argv=None):
    parser = argparse.ArgumentParser(description='Validate a CGRP tour.')
    parser.add_argument('--verbose', action='store_true', default=False)
    add_arguments(parser)
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    sys.exit(execute(args))


if __name__ == '__main__':
    main()
