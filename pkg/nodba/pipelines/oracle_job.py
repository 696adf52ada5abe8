from nodba.agent import recommend
from nodba.common import Job
from nodba.environment import EnvConfig
from nodba.errors import UsageError
from nodba.oracle import enumerate_optimal, regret_ratio
from nodba.utils.logger_utils import get_logger

_logger = get_logger()


class OracleJob(Job):

    def launch(self) -> dict:
        _logger.info('Launching OracleJob job')
        catalog = self.get_catalog()
        workload = self.get_workload(catalog)
        k = int(self.conf.get('k', EnvConfig().k))
        if not 0 <= k <= catalog.m:
            raise UsageError(f'k must lie in [0, {catalog.m}], got {k}')

        with self.cost_provider() as provider:
            best = enumerate_optimal(workload, catalog, k, provider)
            result = best.to_dict(catalog)

            if self.conf.get('regret') is not None:
                if k < 1:
                    raise UsageError('--regret needs k >= 1')
                params, env_cfg = self.get_policy(catalog, key='regret')
                config = recommend(params, workload, catalog, env_cfg, selectivity_fn=provider.predicate_selectivity)
                cost = provider.workload_cost(workload, config, catalog)
                result['policy'] = {'columns': config.names(catalog),
                                    'cost': cost,
                                    'regret': regret_ratio(cost, best.cost)}
                _logger.info(f'Policy regret: {result["policy"]["regret"]:.4f}')
        _logger.info('OracleJob job finished!')

        return result
