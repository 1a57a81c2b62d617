import argparse
import json
import logging
import sys

from cgrp.config import resolve_seed, setup_logging
from cgrp.data.dataset import PRESETS, load_spec, preset_spec, write_dataset
from cgrp.errors import CGRPError, error_payload


def run(out, preset=None, spec=None, count=200, seed=None, progress=True):
    """Generate a seeded dataset of CGRP instances.

    Instance ``i`` is generated with seed ``seed + i``, so the same arguments always produce identical files.

    Args:
        out: JSON Lines output file; a ``<stem>.manifest.json`` sidecar is written next to it.
        preset: name of a preset distribution in ``PRESETS``.
        spec: YAML/JSON file with InstanceSpec fields (top level or under ``instance:``); overrides ``preset``.
        count: number of instances.
        seed: base seed, defaults to ``CGRP_SEED`` or 0.
        progress: show a progress bar.

    Returns:
        Path of the manifest.
    """
    if count < 0:
        raise ValueError(f'Invalid count: {count}, must be >= 0')
    if spec is not None:
        instance_spec = load_spec(spec)
    elif preset is not None:
        instance_spec = preset_spec(preset)
    else:
        raise ValueError(f'Either a preset ({sorted(PRESETS)}) or a spec file is required')
    seed = resolve_seed(seed)
    logging.info('Generating %d instances (preset=%s, seed=%d)' % (count, preset, seed))
    return write_dataset(out, instance_spec, count, seed, preset=preset if spec is None else None,
                         progress=progress)


def add_arguments(parser):
    parser.add_argument('--preset', type=str, default=None, choices=sorted(PRESETS), help='preset distribution')
    parser.add_argument('--spec', type=str, default=None, help='instance spec file (YAML or JSON)')
    parser.add_argument('--count', type=int, default=200, help='number of instances')
    parser.add_argument('--seed', type=int, default=None, help='base seed (default: $CGRP_SEED or 0)')
    parser.add_argument('--out', type=str, required=True, help='output JSON Lines file')
    parser.add_argument('--no_progress', action='store_true', default=False)


def execute(args):
    try:
        run(args.out, preset=args.preset, spec=args.spec, count=args.count, seed=args.seed,
            progress=not args.no_progress)
    except CGRPError as e:
        logging.error(str(e))
        print(json.dumps(error_payload(e)))
        return 2
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(description='Generate a CGRP dataset.')
    parser.add_argument('--verbose', action='store_true', default=False)
    add_arguments(parser)
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    sys.exit(execute(args))


if __name__ == '__main__':
    main()
