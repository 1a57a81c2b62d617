import dataclasses
import json
import logging
import os

import yaml

SEED_ENV = 'CGRP_SEED'


def load_config(path):
    """Load a YAML or JSON config file into a dictionary.

    Args:
        path: path to a ``.yaml``/``.yml`` or ``.json`` file. ``None`` yields an empty config.

    Returns:
        Dictionary with the top-level config sections.
    """
    if path is None:
        return {}
    ext = os.path.splitext(path)[1].lower()
    with open(path) as f:
        if ext in ['.yaml', '.yml']:
            info = yaml.safe_load(f)
        elif ext == '.json':
            info = json.load(f)
        else:
            raise ValueError(f'Unknown config format: {ext}, must be in [.yaml, .yml, .json]')
    info = {} if info is None else info
    if not isinstance(info, dict):
        raise ValueError(f'Config {path} must contain a mapping at the top level')
    logging.debug('Loaded config: %s' % path)
    return info


def resolve_seed(seed=None):
    """Explicit seed, else the ``CGRP_SEED`` environment variable, else 0."""
    if seed is not None:
        return int(seed)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None and env_seed.strip() != '':
        return int(env_seed)
    return 0


def from_dict(cls, d):
    """Build the dataclass ``cls`` from a config section, rejecting unknown keys."""
    d = {} if d is None else dict(d)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(d) - names)
    if len(unknown) > 0:
        raise ValueError(f'Unknown {cls.__name__} keys: {unknown}, must be in {sorted(names)}')
    for f in dataclasses.fields(cls):
        # YAML lists become tuples for tuple-typed fields
        if f.name in d and isinstance(d[f.name], list) and isinstance(f.default, tuple):
            d[f.name] = tuple(d[f.name])
    return cls(**d)


def setup_logging(verbose=False):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format='%(asctime)s %(levelname)s %(message)s')
