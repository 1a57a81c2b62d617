import argparse
import json
import logging
import os
import sys
import time

from cgrp.config import load_config, resolve_seed, setup_logging
from cgrp.cost.model import CostModel, evaluate_tour
from cgrp.data.dataset import load_instance, save_tour
from cgrp.env.environment import rollout
from cgrp.env.policy import AttentionPolicy
from cgrp.errors import CGRPError, error_payload
from cgrp.solver import alns, altopt, exact
from cgrp.solver.alns import AlnsConfig
from cgrp.solver.altopt import AltOptConfig
from cgrp.solver.report import SolverReport

ALGOS = ['exact-dp', 'exact-bf', 'alns', 'altopt', 'greedy', 'policy-greedy', 'policy-sample']


def _seeded(section, seed):
    section = dict(section or {})
    section['seed'] = seed
    return section


def _greedy(instance, config, seed):
    start = time.perf_counter()
    model = CostModel.from_instance(instance)
    tour = alns.initial_solution(instance, model.cs, model.cm, seed)
    objective = evaluate_tour(tour, model.cs, model.cm)
    return SolverReport(solver='greedy', objective=objective, tour=tour, wall_time=time.perf_counter() - start,
                        iterations=model.cs.num_tasks, seed=seed)


def _policy(sample):
    def solve(instance, config, seed):
        start = time.perf_counter()
        policy_config = dict(config.get('policy', {}) or {})
        policy = AttentionPolicy(sample=sample, seed=seed, **policy_config)
        result = rollout(instance, policy, seed=seed)
        return SolverReport(solver='policy-sample' if sample else 'policy-greedy', objective=result.objective,
                            tour=result.tour, wall_time=time.perf_counter() - start,
                            iterations=len(result.log_probs), seed=seed, config=policy_config,
                            trace=[{'log_probs': list(result.log_probs)}])
    return solve


SOLVERS = {
    'exact-dp': lambda instance, config, seed: exact.run(instance, 'exact-dp', seed),
    'exact-bf': lambda instance, config, seed: exact.run(instance, 'exact-bf', seed),
    'alns': lambda instance, config, seed: alns.run(instance, AlnsConfig.from_dict(_seeded(config.get('alns'), seed))),
    'altopt': lambda instance, config, seed: altopt.run(instance, AltOptConfig.from_dict(_seeded(config.get('altopt'), seed))),
    'greedy': _greedy,
    'policy-greedy': _policy(sample=False),
    'policy-sample': _policy(sample=True),
}


def solve_instance(instance, algo, config=None, seed=0, instance_id=None):
    """Dispatch ``instance`` to the named solver; ``config`` holds the per-solver sections."""
    if algo not in SOLVERS:
        raise ValueError(f'Invalid algo: {algo}, must be in {ALGOS}')
    report = SOLVERS[algo](instance, config or {}, seed)
    report.instance_id = instance_id
    return report


def run(instance, algo, config=None, seed=None, tour_out=None, with_trace=False):
    """Solve a single instance file and print the report as JSON.

    Args:
        instance: path to a ``.json`` instance (or single-line ``.jsonl``).
        algo: solver name, one of ``ALGOS``.
        config: optional YAML/JSON file with ``alns:``, ``altopt:`` or ``policy:`` sections.
        seed: solver seed, defaults to ``CGRP_SEED`` or 0.
        tour_out: optional path for the tour JSON.

    Returns:
        SolverReport
    """
    seed = resolve_seed(seed)
    report = solve_instance(load_instance(instance), algo, load_config(config), seed,
                            instance_id=os.path.splitext(os.path.basename(instance))[0])
    if tour_out is not None:
        save_tour(report.tour, report.objective, tour_out)
    print(report.to_json(with_trace=with_trace))
    return report


def add_arguments(parser):
    parser.add_argument('instance', type=str, help='instance file')
    parser.add_argument('--algo', type=str, required=True, choices=ALGOS, help='solver')
    parser.add_argument('--config', type=str, default=None, help='solver config file (YAML or JSON)')
    parser.add_argument('--seed', type=int, default=None, help='solver seed (default: $CGRP_SEED or 0)')
    parser.add_argument('--tour_out', type=str, default=None, help='write the tour JSON to this path')
    parser.add_argument('--trace', action='store_true', default=False, help='include the iteration trace')


def execute(args):
    try:
        run(args.instance, args.algo, config=args.config, seed=args.seed, tour_out=args.tour_out,
            with_trace=args.trace)
    except CGRPError as e:
        logging.error(str(e))
        print(json.dumps(error_payload(e)))
        return 2
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(description='Solve a CGRP instance.')
    parser.add_argument('--verbose', action='store_true', default=False)
    add_arguments(parser)
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    sys.exit(execute(args))


if __name__ == '__main__':
    main()
