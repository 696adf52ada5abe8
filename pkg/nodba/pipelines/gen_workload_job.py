from nodba.common import Job
from nodba.errors import UsageError
from nodba.utils.logger_utils import get_logger
from nodba.utils.seeding import fresh_seed
from nodba.workload import generate_workload, write_workload

_logger = get_logger()


class GenWorkloadJob(Job):

    def _get_seed(self) -> int:
        seed = self.get_seed()
        if seed is None:
            seed = fresh_seed()
            _logger.info(f'No seed given, drew seed {seed}')
        return seed

    def launch(self) -> dict:
        _logger.info('Launching GenWorkloadJob job')
        catalog = self.get_catalog()
        queries = int(self.require('queries'))
        if queries < 1:
            raise UsageError(f'--queries must be positive, got {queries}')
        seed = self._get_seed()
        out = self.conf.get('out', 'workload.json')

        workload = generate_workload(catalog, queries, self.get_generator_profile(), seed)
        write_workload(workload, out)
        _logger.info(f'Wrote {workload.n} queries on {catalog.table_name} to {out}')
        _logger.info('GenWorkloadJob job finished!')

        return {'out': str(out), 'queries': workload.n, 'seed': seed}
