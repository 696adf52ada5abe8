import time

from nodba.agent import recommend
from nodba.common import Job
from nodba.cost_model import IndexConfig
from nodba.environment import reward_fn
from nodba.utils.logger_utils import get_logger

_logger = get_logger()


class RecommendJob(Job):

    def launch(self) -> dict:
        _logger.info('Launching RecommendJob job')
        catalog = self.get_catalog()
        params, env_cfg = self.get_policy(catalog)
        workload = self.get_workload(catalog)

        with self.cost_provider() as provider:
            # the state encodes the provider's selectivities; rollout steps are costed analytically
            start = time.perf_counter()
            config = recommend(params, workload, catalog, env_cfg, selectivity_fn=provider.predicate_selectivity)
            latency_ms = (time.perf_counter() - start) * 1000.0
            _logger.info(f'Prediction took {latency_ms:.2f} ms')

            cost_configured = provider.workload_cost(workload, config, catalog)
            cost_no_index = provider.workload_cost(workload, IndexConfig.empty(catalog.m, env_cfg.k), catalog)
        _logger.info('RecommendJob job finished!')

        return {'indexes': config.names(catalog),
                'cost_configured': cost_configured,
                'cost_no_index': cost_no_index,
                'reward': reward_fn(cost_no_index, cost_configured),
                'latency_ms': latency_ms}
