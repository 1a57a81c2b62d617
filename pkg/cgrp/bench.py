import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed

from tqdm import tqdm

from cgrp.config import load_config, resolve_seed, setup_logging
from cgrp.data.dataset import load_instances
from cgrp.errors import CGRPError, error_payload
from cgrp.evaluation.metric import add_gaps, results_frame, summarize
from cgrp.solve import ALGOS, solve_instance

BENCH_KEYS = ['dataset', 'algos', 'baseline', 'jobs', 'out', 'seed']


def _bench_job(job):
    instance_id, instance, algo, config, seed = job
    return solve_instance(instance, algo, config, seed, instance_id=instance_id)


def summary_path(out):
    return os.path.splitext(out)[0] + '.summary.json'


def parse_algos(algos):
    algos = [a.strip() for a in algos.split(',') if a.strip() != ''] if isinstance(algos, str) else list(algos)
    for algo in algos:
        if algo not in ALGOS:
            raise ValueError(f'Invalid algo: {algo}, must be in {ALGOS}')
    return algos


def run(dataset, algos, baseline, config=None, jobs=1, out='report.csv', seed=None, logging_config=None,
        progress=True):
    """Run every solver on every instance of a dataset and write the Obj / Gap / Time report.

    Each instance-solver pair is an independent job; with ``jobs > 1`` they are fanned out to a process pool.
    Results are merged by (instance_id, solver), so the table does not depend on completion order.

    Args:
        dataset: JSON Lines dataset; the instance id is the line index.
        algos: solver names (list or comma-separated string). The baseline is added when missing.
        baseline: solver the gaps are computed against.
        config: solver config dictionary (``alns:``, ``altopt:``, ``policy:`` sections).
        jobs: number of worker processes.
        out: CSV path; the summary is written to ``<stem>.summary.json``.
        seed: solver seed shared by all runs, defaults to ``CGRP_SEED`` or 0.
        logging_config: optional ``wandb.init`` arguments (project, name, mode, ...).
        progress: show a progress bar.

    Returns:
        BenchmarkSummary
    """
    algos = parse_algos(algos)
    if baseline not in algos:
        logging.info('Adding baseline %s to the solver list' % baseline)
        algos = parse_algos(algos + [baseline])
    if jobs < 1:
        raise ValueError(f'Invalid jobs: {jobs}, must be >= 1')
    config = {} if config is None else config
    seed = resolve_seed(seed)

    instances = load_instances(dataset)
    job_list = [(i, instance, algo, config, seed) for i, instance in enumerate(instances) for algo in algos]
    logging.info('Benchmarking %s on %d instances (%d runs, %d jobs)' % (algos, len(instances), len(job_list), jobs))

    reports = []
    if jobs == 1:
        it = tqdm(job_list, desc='Benchmark', unit='run') if progress else job_list
        reports = [_bench_job(job) for job in it]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = [executor.submit(_bench_job, job) for job in job_list]
            it = as_completed(futures)
            it = tqdm(it, total=len(futures), desc='Benchmark', unit='run') if progress else it
            for future in it:
                reports.append(future.result())

    df = add_gaps(results_frame(reports), baseline)
    summary = summarize(df, baseline)

    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    df.to_csv(out, index=False, lineterminator='\r\n')
    with open(summary_path(out), 'w') as f:
        json.dump(summary.to_dict(), f, indent=2, sort_keys=True)
    for solver in sorted(summary.mean_objective):
        logging.info('%s: Obj %.4f, Gap %.3f%%, Time %.2fs' % (solver, summary.mean_objective[solver],
                                                                summary.mean_gap_pct[solver],
                                                                summary.total_time_s[solver]))

    if logging_config:
        _log_wandb(df, summary, logging_config, {'dataset': dataset, 'algos': algos, 'baseline': baseline,
                                                 'seed': seed, 'solver_config': config})
    return summary


def _log_wandb(df, summary, logging_config, run_config):
    import wandb

    wandb.init(**logging_config, config=run_config)
    wandb.log({f'{key}/{solver}': value for key in ['mean_objective', 'mean_gap_pct', 'total_time_s']
               for solver, value in getattr(summary, key).items()})
    wandb.log({'results': wandb.Table(dataframe=df)})
    wandb.finish()


def add_arguments(parser):
    parser.add_argument('--dataset', type=str, default=None, help='JSON Lines dataset')
    parser.add_argument('--algos', type=str, default=None, help='comma-separated solver names')
    parser.add_argument('--baseline', type=str, default=None, help='baseline solver for the gap')
    parser.add_argument('--jobs', type=int, default=None, help='number of worker processes')
    parser.add_argument('--out', type=str, default=None, help='output CSV (default: report.csv)')
    parser.add_argument('--seed', type=int, default=None, help='solver seed (default: $CGRP_SEED or 0)')
    parser.add_argument('--config', type=str, default=None,
                        help='bench config file with bench:, solver and logging: sections')
    parser.add_argument('--no_progress', action='store_true', default=False)


def execute(args):
    info = load_config(args.config)
    # command-line flags win over the bench: section
    for key, value in (info.get('bench', {}) or {}).items():
        if key not in BENCH_KEYS:
            raise ValueError(f'Unknown bench key: {key}, must be in {BENCH_KEYS}')
        if getattr(args, key, None) is None:
            args.__dict__[key] = value
    if args.dataset is None or args.algos is None or args.baseline is None:
        raise ValueError('--dataset, --algos and --baseline are required (on the command line or under bench:)')
    solver_config = {k: v for k, v in info.items() if k not in ['bench', 'logging']}
    try:
        summary = run(args.dataset, args.algos, args.baseline, config=solver_config,
                      jobs=1 if args.jobs is None else args.jobs,
                      out='report.csv' if args.out is None else args.out, seed=args.seed,
                      logging_config=info.get('logging'), progress=not args.no_progress)
    except CGRPError as e:
        logging.error(str(e))
        print(json.dumps(error_payload(e)))
        return 2
    print(json.dumps(summary.to_dict()))
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(description='Benchmark CGRP solvers on a dataset.')
    parser.add_argument('--verbose', action='store_true', default=False)
    add_arguments(parser)
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    sys.exit(execute(args))


if __name__ == '__main__':
    main()
