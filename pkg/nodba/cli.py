"""
nodba command line: gen-workload, train, recommend, evaluate, oracle.

Flags are collected into a conf dict; unset flags stay None so values from --conf-file survive. Exit codes: 0 on
success, 2 on usage errors, 1 on any other failure.
"""
import argparse
import json
import sys
from typing import List, Optional

from nodba import __version__
from nodba.errors import NoDBAError, UsageError
from nodba.pipelines.evaluate_job import EvaluateJob
from nodba.pipelines.gen_workload_job import GenWorkloadJob
from nodba.pipelines.oracle_job import OracleJob
from nodba.pipelines.recommend_job import RecommendJob
from nodba.pipelines.train_job import TrainJob
from nodba.utils.logger_utils import get_logger

_logger = get_logger()

JOBS = {'gen-workload': GenWorkloadJob,
        'train': TrainJob,
        'recommend': RecommendJob,
        'evaluate': EvaluateJob,
        'oracle': OracleJob}

# consumed by the CLI itself, never forwarded to the job conf
_CLI_ONLY = ('command', 'conf_file', 'env')


def positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f'{value!r} is not an integer')
    if number < 1:
        raise argparse.ArgumentTypeError(f'{value} is an invalid positive int value')
    return number


def non_negative_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f'{value!r} is not an integer')
    if number < 0:
        raise argparse.ArgumentTypeError(f'{value} is negative')
    return number


def unit_fraction(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f'{value!r} is not a number')
    if not 0.0 < number <= 1.0:
        raise argparse.ArgumentTypeError(f'{value} is not in (0, 1]')
    return number


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument('--catalog', help='Catalog JSON (default: bundled lineitem_sf1.json)')
    p.add_argument('--conf-file', help='YAML file with default values for this command')
    p.add_argument('--env', help='dotenv file loaded into the environment')


def _add_cost(p: argparse.ArgumentParser) -> None:
    p.add_argument('--cost', choices=('analytic', 'dbms'), help='Cost source (default: analytic)')
    p.add_argument('--db-url', help='Database URL for --cost dbms (default: $NODBA_DB_URL)')


def _add_columns(p: argparse.ArgumentParser) -> None:
    p.add_argument('--columns', help='Comma separated candidate columns for generated workloads')
    p.add_argument('--min-workload-columns', type=positive_int,
                   help='Draw a column subset of at least this size for every generated workload')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='nodba', description='Learned single-column index advisor')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('gen-workload', help='Generate a random workload')
    _add_common(p)
    _add_columns(p)
    p.add_argument('--queries', type=positive_int, help='Number of queries')
    p.add_argument('--seed', type=non_negative_int,
                   help='Generator seed (a fresh one is drawn and printed when omitted)')
    p.add_argument('--out', help='Output workload JSON (default: workload.json)')

    p = sub.add_parser('train', help='Train a policy with the cross-entropy method')
    _add_common(p)
    _add_cost(p)
    _add_columns(p)
    p.add_argument('--k', type=int, help='Index budget (default: 3)')
    p.add_argument('--n-fixed', type=positive_int, help='Query rows in the state encoding (default: 5)')
    p.add_argument('--population', type=positive_int)
    p.add_argument('--iterations', type=positive_int)
    p.add_argument('--elite-frac', type=unit_fraction)
    p.add_argument('--episodes', type=positive_int, help='Workloads per evaluation batch')
    p.add_argument('--validation-episodes', type=non_negative_int,
                   help='Held-out workloads used to pick the best policy, 0 to pick by batch fitness (default: 16)')
    p.add_argument('--threads', type=positive_int)
    p.add_argument('--seed', type=non_negative_int)
    p.add_argument('--out', help='Policy JSON (default: policy.json)')
    p.add_argument('--history', help='History CSV (default: history.csv)')
    p.add_argument('--experiment-path', help='MLflow experiment to track the run in (default: $NODBA_EXPERIMENT_PATH)')
    p.add_argument('--no-evaluate', dest='evaluate', action='store_false', default=None,
                   help='Skip scoring the policy on the bundled workloads')

    p = sub.add_parser('recommend', help='Recommend indexes for a workload')
    _add_common(p)
    _add_cost(p)
    p.add_argument('--policy', help='Policy JSON')
    p.add_argument('--workload', help='Workload JSON')
    p.add_argument('--k', type=int, help='Index budget (default: the one the policy was trained with)')

    p = sub.add_parser('evaluate', help='Per-query cost report for a configuration')
    _add_common(p)
    _add_cost(p)
    p.add_argument('--workload', help='Workload JSON')
    p.add_argument('--policy', help='Policy JSON whose recommendation is evaluated')
    p.add_argument('--indexes', help='Comma separated indexed columns')
    p.add_argument('--k', type=int)
    p.add_argument('--format', choices=('csv', 'json'))
    p.add_argument('--out', help='Write the report here instead of stdout')

    p = sub.add_parser('oracle', help='Exhaustive optimum for a workload')
    _add_common(p)
    _add_cost(p)
    p.add_argument('--workload', help='Workload JSON')
    p.add_argument('--k', type=int, help='Index budget (default: 3)')
    p.add_argument('--regret', metavar='POLICY', help='Also report the regret of this policy')

    return parser


def _emit(result) -> None:
    if isinstance(result, str):
        sys.stdout.write(result)
    else:
        sys.stdout.write(json.dumps(result, indent=2) + '\n')
    sys.stdout.flush()


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    conf = {k: v for k, v in vars(args).items() if k not in _CLI_ONLY}
    try:
        job = JOBS[args.command](init_conf=conf, conf_file=args.conf_file, env_file=args.env)
        _emit(job.launch())
    except UsageError as e:
        _logger.error(f'nodba {args.command}: {e}')
        return 2
    except (NoDBAError, OSError) as e:
        _logger.error(f'nodba {args.command}: {e}')
        return 1

    return 0


if __name__ == '__main__':
    sys.exit(main())
