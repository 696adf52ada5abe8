from nodba.agent import recommend
from nodba.catalog import Catalog
from nodba.common import Job, split_columns
from nodba.cost_model import CostProvider, IndexConfig, cost_report
from nodba.errors import ColumnNotFoundError, ConfigError, UsageError
from nodba.utils.logger_utils import get_logger
from nodba.workload import Workload

_logger = get_logger()

FORMATS = ('csv', 'json')


class EvaluateJob(Job):

    def _get_config(self, catalog: Catalog, workload: Workload, provider: CostProvider) -> IndexConfig:
        """
        Configuration to report on: an explicit --indexes list, or the recommendation of --policy
        """
        indexes = split_columns(self.conf.get('indexes'))
        has_policy = self.conf.get('policy') is not None
        if (indexes is None) == (not has_policy):
            raise UsageError('Pass exactly one of --policy or --indexes')

        if indexes is not None:
            try:
                return IndexConfig.from_names(indexes, catalog)
            except ColumnNotFoundError as e:
                raise UsageError(str(e)) from e
            except ConfigError as e:
                raise UsageError(f'Invalid --indexes: {e}') from e

        params, env_cfg = self.get_policy(catalog)
        return recommend(params, workload, catalog, env_cfg, selectivity_fn=provider.predicate_selectivity)

    def launch(self) -> str:
        _logger.info('Launching EvaluateJob job')
        fmt = self.conf.get('format', 'csv')
        if fmt not in FORMATS:
            raise UsageError(f'--format must be one of {FORMATS}, got {fmt!r}')
        catalog = self.get_catalog()
        workload = self.get_workload(catalog)
        with self.cost_provider() as provider:
            config = self._get_config(catalog, workload, provider)
            _logger.info(f'Evaluating configuration {config.names(catalog)} with {self.cost_kind()} costs')
            report = cost_report(workload, config, catalog, provider)

        text = report.to_csv() if fmt == 'csv' else report.to_json() + '\n'
        out = self.conf.get('out')
        if out is not None:
            with open(out, 'w') as f:
                f.write(text)
            _logger.info(f'Report written to {out}')
        _logger.info('EvaluateJob job finished!')

        return text
