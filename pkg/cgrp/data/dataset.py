import json
import logging
import os

from tqdm import tqdm

from cgrp.config import from_dict, load_config
from cgrp.cost.model import Tour
from cgrp.data.geometry import Instance, InstanceSpec, PointTask, LineTask, AreaTask, generate_instance

FORMAT_VERSION = 1

# desk-scale versions of the evaluation suites; 100-task suites use a tighter anchor separation
PRESETS = {
    'cgrp20': dict(size_range=(20, 21), area_range=(0, 5), line_range=(0, 20)),
    'cgrp50': dict(size_range=(50, 51), area_range=(0, 5), line_range=(0, 20)),
    'cgrp100': dict(size_range=(100, 101), area_range=(0, 5), line_range=(0, 20), min_anchor_separation=0.04),
    'train': dict(size_range=(20, 100), area_range=(0, 5), line_range=(0, 20), min_anchor_separation=0.04),
    'point20': dict(size_range=(20, 21), area_range=(0, 1), line_range=(0, 1)),
    'point100': dict(size_range=(100, 101), area_range=(0, 1), line_range=(0, 1), min_anchor_separation=0.04),
    'line20': dict(size_range=(20, 21), area_range=(0, 1), line_range=(20, 21)),
    'line100': dict(size_range=(100, 101), area_range=(0, 1), line_range=(100, 101), min_anchor_separation=0.04),
    'area20': dict(size_range=(20, 21), area_range=(20, 21), line_range=(0, 1)),
    'area100': dict(size_range=(100, 101), area_range=(100, 101), line_range=(0, 1), min_anchor_separation=0.04),
    'area20line30': dict(size_range=(50, 51), area_range=(20, 21), line_range=(30, 31)),
    'area20line80': dict(size_range=(100, 101), area_range=(20, 21), line_range=(80, 81),
                         min_anchor_separation=0.04),
    # small mixed suites used as exact-oracle benchmarks
    'oracle7': dict(size_range=(1, 8), area_range=(0, 3), line_range=(0, 4)),
    'oracle9': dict(size_range=(2, 10), area_range=(0, 3), line_range=(0, 4)),
}


def preset_spec(name):
    if name not in PRESETS:
        raise ValueError(f'Invalid preset: {name}, must be in {sorted(PRESETS)}')
    return InstanceSpec(**PRESETS[name])


def load_spec(path):
    """InstanceSpec from a config file, either at the top level or under an ``instance:`` section."""
    info = load_config(path)
    info = info.get('instance', info)
    return from_dict(InstanceSpec, info)


def instance_to_dict(instance):
    """Versioned JSON document of an instance.

    Floats are written with Python's shortest round-trip representation (at most 17 significant digits),
    so loading returns bit-identical values.
    """
    return {'version': FORMAT_VERSION,
            'seed': instance.seed,
            'omega': instance.omega,
            'gamma': instance.gamma,
            'unit_square': instance.unit_square,
            'depot': list(instance.depot),
            'points': [list(p.loc) for p in instance.points],
            'lines': [list(l.p1) + list(l.p2) for l in instance.lines],
            'areas': [{'anchor': list(a.anchor), 'length': a.length, 'width': a.width, 'beta': a.beta,
                       'detection_range': a.detection_range}
                      for a in instance.areas]}


def instance_from_dict(d):
    version = d.get('version', FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ValueError(f'Unsupported instance format version: {version}, must be {FORMAT_VERSION}')
    gamma = float(d['gamma'])
    areas = tuple(AreaTask(anchor=tuple(map(float, a['anchor'])), length=float(a['length']),
                           width=float(a['width']), beta=float(a['beta']),
                           detection_range=float(a.get('detection_range', gamma)))
                  for a in d.get('areas', []))
    lines = tuple(LineTask(p1=(float(l[0]), float(l[1])), p2=(float(l[2]), float(l[3])))
                  for l in d.get('lines', []))
    points = tuple(PointTask(loc=(float(p[0]), float(p[1]))) for p in d.get('points', []))
    return Instance(depot=(float(d['depot'][0]), float(d['depot'][1])), points=points, lines=lines, areas=areas,
                    omega=int(d.get('omega', 4)), seed=int(d.get('seed', 0)), gamma=gamma,
                    unit_square=bool(d.get('unit_square', True)))


def dumps_instance(instance):
    return json.dumps(instance_to_dict(instance), separators=(',', ':'))


def save_instance(instance, path):
    with open(path, 'w') as f:
        f.write(dumps_instance(instance) + '\n')


def load_instances(path):
    """All instances of a JSON Lines dataset, or the single instance of a ``.json`` file."""
    with open(path) as f:
        if path.endswith('.json'):
            return [instance_from_dict(json.load(f))]
        return [instance_from_dict(json.loads(line)) for line in f if line.strip() != '']


def load_instance(path):
    instances = load_instances(path)
    if len(instances) != 1:
        raise ValueError(f'Expected a single instance in {path}, found {len(instances)}')
    return instances[0]


def manifest_path(path):
    return os.path.splitext(path)[0] + '.manifest.json'


def write_dataset(path, spec, count, seed, preset=None, progress=True):
    """Generate ``count`` instances with seeds ``seed + index`` into a JSON Lines file plus manifest.

    Returns:
        Path of the sidecar manifest.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    it = range(count)
    it = tqdm(it, desc='Generating', unit='instance') if progress else it
    with open(path, 'w') as f:
        for i in it:
            f.write(dumps_instance(generate_instance(spec, seed + i)) + '\n')
    manifest = {'format_version': FORMAT_VERSION, 'preset': preset, 'spec': spec.to_dict(),
                'count': count, 'seed': seed}
    m_path = manifest_path(path)
    with open(m_path, 'w') as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    logging.info('Wrote %d instances to %s' % (count, path))
    return m_path


def read_manifest(path):
    with open(manifest_path(path)) as f:
        return json.load(f)


def save_tour(tour, objective, path):
    with open(path, 'w') as f:
        json.dump(tour.to_dict(objective), f)


def load_tour(path):
    with open(path) as f:
        return Tour.from_dict(json.load(f))
