"""
Exhaustive index selection: evaluate every subset of the workload's used columns of size 0..k and keep the cheapest.
Columns no query predicates on never change a query's cost, so leaving them out does not change the optimum.
"""
import math
from dataclasses import dataclass
from itertools import combinations
from typing import List

from nodba.catalog import Catalog
from nodba.cost_model import AnalyticCostProvider, CostProvider, IndexConfig, used_column_positions
from nodba.errors import EnumerationTooLargeError
from nodba.utils.logger_utils import get_logger
from nodba.workload import Workload

_logger = get_logger()

MAX_CONFIGS = 10 ** 6


@dataclass
class OracleResult:
    config: IndexConfig
    cost: float
    configs_evaluated: int

    def to_dict(self, catalog: Catalog) -> dict:
        return {'columns': self.config.names(catalog),
                'cost': self.cost,
                'configs_evaluated': self.configs_evaluated}


def count_configs(n_columns: int, k: int) -> int:
    return sum(math.comb(n_columns, i) for i in range(min(k, n_columns) + 1))


def enumerate_optimal(workload: Workload,
                      catalog: Catalog,
                      k: int,
                      cost_provider: CostProvider = None,
                      columns: List[int] = None) -> OracleResult:
    """
    Cost-minimal configuration of at most k indexes. Ties go to the lexicographically smallest bitlist

    Parameters
    ----------
    workload : Workload
    catalog : Catalog
    k : int
        Maximum number of indexes
    cost_provider : CostProvider
        cost(L) source, analytic by default
    columns : list of int
        Column positions to enumerate over. Defaults to the columns the workload uses

    Returns
    -------
    OracleResult
    """
    cost_provider = cost_provider or AnalyticCostProvider()
    if k < 0:
        raise EnumerationTooLargeError(f'k must be non-negative, got {k}')
    candidates = sorted(columns) if columns is not None else used_column_positions([workload], catalog)
    total = count_configs(len(candidates), k)
    if total > MAX_CONFIGS:
        raise EnumerationTooLargeError(
            f'{total} configurations over {len(candidates)} columns with k={k} exceed the limit of {MAX_CONFIGS}; '
            f'lower k or restrict the workload to fewer columns')

    best_key, best_config = None, None
    evaluated = 0
    for size in range(min(k, len(candidates)) + 1):
        for subset in combinations(candidates, size):
            config = IndexConfig.from_columns(subset, catalog.m, k)
            cost = cost_provider.workload_cost(workload, config, catalog)
            evaluated += 1
            key = (cost, config.bits)
            if best_key is None or key < best_key:
                best_key, best_config = key, config

    _logger.info(f'Oracle evaluated {evaluated} configurations, best {best_config.names(catalog)} '
                 f'cost={best_key[0]:.3f}')

    return OracleResult(config=best_config, cost=best_key[0], configs_evaluated=evaluated)


def regret(config: IndexConfig,
           workload: Workload,
           catalog: Catalog,
           k: int,
           cost_provider: CostProvider = None) -> float:
    """
    cost(config) / cost(optimum); 1.0 means config is optimal
    """
    cost_provider = cost_provider or AnalyticCostProvider()
    best = enumerate_optimal(workload, catalog, k, cost_provider)
    cost = cost_provider.workload_cost(workload, config, catalog)

    return regret_ratio(cost, best.cost)


def regret_ratio(cost: float, optimal_cost: float) -> float:
    if optimal_cost == 0:
        return 1.0 if cost == 0 else math.inf
    return cost / optimal_cost
