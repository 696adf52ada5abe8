from typing import Dict

from nodba.catalog import Catalog
from nodba.cost_model import AnalyticCostProvider, CostProvider, IndexConfig
from nodba.environment import reward_fn
from nodba.oracle import enumerate_optimal, regret_ratio
from nodba.workload import Workload


class RecommendationEvaluation:
    """
    Scores an index configuration on one workload: configured and no-index cost, reward, and regret against the
    exhaustive optimum under the same cost provider.
    """
    def __init__(self, cost_provider: CostProvider = None):
        self.cost_provider = cost_provider or AnalyticCostProvider()

    def evaluate(self,
                 config: IndexConfig,
                 workload: Workload,
                 catalog: Catalog,
                 k: int = None,
                 metric_prefix: str = '') -> Dict[str, float]:
        """
        Parameters
        ----------
        config : IndexConfig
            Recommended configuration
        workload : Workload
            Workload the configuration is scored on
        catalog : Catalog
        k : int
            Index budget of the optimum. Defaults to config.k
        metric_prefix : str
            Prefix for each metric key in the returned dictionary

        Returns
        -------
        Dictionary of (metric name, computed value)
        """
        k = config.k if k is None else k
        cost_no_index = self.cost_provider.workload_cost(workload, IndexConfig.empty(catalog.m, k), catalog)
        cost_configured = self.cost_provider.workload_cost(workload, config, catalog)
        optimum = enumerate_optimal(workload, catalog, k, self.cost_provider)

        return {
            f'{metric_prefix}cost_configured': cost_configured,
            f'{metric_prefix}cost_no_index': cost_no_index,
            f'{metric_prefix}cost_optimal': optimum.cost,
            f'{metric_prefix}reward': reward_fn(cost_no_index, cost_configured),
            f'{metric_prefix}regret': regret_ratio(cost_configured, optimum.cost),
        }
