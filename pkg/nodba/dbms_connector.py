"""
Live PostgreSQL backend: optimizer plan-cost estimates via EXPLAIN, measured single-predicate selectivities and
creation/removal of the advisor's own single-column indexes (named nodba_idx_<column>).

One DbConnection serializes every statement; it must not be shared between threads.
"""
import json
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import psycopg2
from psycopg2 import sql

from nodba.catalog import Catalog
from nodba.cost_model import LIVE, CostProvider, IndexConfig
from nodba.errors import ConfigError, DbmsError, NoDBAError, PlanParseError
from nodba.utils.logger_utils import get_logger
from nodba.workload import EQ, LT, Predicate, Query, Workload

_logger = get_logger()

DB_URL_ENV_VAR = 'NODBA_DB_URL'
INDEX_PREFIX = 'nodba_idx_'

_SQL_OPS = {EQ: sql.SQL('='), LT: sql.SQL('<')}


@dataclass
class DbConnectionConfig:
    """
    Attributes:
        url (str): libpq connection string or postgresql:// URL. Falls back to $NODBA_DB_URL
        statement_timeout_s (int): Per-statement timeout in seconds
    """
    url: Optional[str] = None
    statement_timeout_s: int = 60

    def resolve_url(self) -> str:
        url = self.url or os.environ.get(DB_URL_ENV_VAR)
        if not url:
            raise ConfigError(f'No database URL given; pass --db-url or set {DB_URL_ENV_VAR}')
        return url


def index_name(column: str) -> str:
    return f'{INDEX_PREFIX}{column}'


def count_statement(query: Query, table: str) -> sql.Composed:
    """
    SELECT count(*) over the conjunction of the query's predicates, with quoted identifiers and bound literals
    """
    conditions = sql.SQL(' AND ').join(
        sql.SQL('{} {} {}').format(sql.Identifier(p.column), _SQL_OPS[p.op], sql.Literal(p.value))
        for p in query.predicates)

    return sql.SQL('SELECT count(*) FROM {} WHERE {}').format(sql.Identifier(table), conditions)


def extract_total_cost(plan_output) -> float:
    """
    Root node 'Total Cost' of EXPLAIN (FORMAT JSON) output. psycopg2 returns the json column already decoded; a raw
    string is accepted too.
    """
    if isinstance(plan_output, str):
        try:
            plan_output = json.loads(plan_output)
        except ValueError as e:
            raise PlanParseError(f'EXPLAIN output is not JSON: {e}') from e
    try:
        return float(plan_output[0]['Plan']['Total Cost'])
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise PlanParseError(f'Unexpected EXPLAIN output: {plan_output!r}') from e


class DbConnection:
    """
    Thin wrapper over a psycopg2 connection. Pass an existing DB-API connection via `connection` (tests use a fake
    one) or let connect() open one from the config.
    """
    def __init__(self, cfg: DbConnectionConfig = None, connection=None):
        self.cfg = cfg or DbConnectionConfig()
        self.connection = connection
        self._selectivity_cache: Dict[Tuple[str, str, str, str], float] = {}
        self._row_counts: Dict[str, int] = {}

    def connect(self) -> 'DbConnection':
        if self.connection is None:
            url = self.cfg.resolve_url()
            try:
                self.connection = psycopg2.connect(url)
            except psycopg2.Error as e:
                raise DbmsError(f'Could not connect to the database: {e}') from e
            self.connection.autocommit = True
            self.execute('SET statement_timeout = %s', (self.cfg.statement_timeout_s * 1000,))
            _logger.info('Connected to database')
        return self

    def close(self) -> None:
        if self.connection is not None:
            self.connection.close()
            self.connection = None

    def __enter__(self) -> 'DbConnection':
        return self.connect()

    def __exit__(self, exc_type, exc, tb):
        self.close()

    def execute(self, statement, params=None, fetch: bool = False):
        if self.connection is None:
            raise DbmsError('Not connected')
        try:
            with self.connection.cursor() as cur:
                cur.execute(statement, params)
                return cur.fetchall() if fetch else None
        except psycopg2.Error as e:
            raise DbmsError(f'Statement failed: {e}') from e

    def table_row_count(self, table: str) -> int:
        if table not in self._row_counts:
            rows = self.execute(sql.SQL('SELECT count(*) FROM {}').format(sql.Identifier(table)), fetch=True)
            self._row_counts[table] = int(rows[0][0])
        return self._row_counts[table]

    def measure_selectivity(self, predicate: Predicate, catalog: Catalog) -> float:
        """
        Fraction of rows of the catalog's table that satisfy one predicate, measured with count(*). Cached per
        (table, column, op, value)
        """
        key = (catalog.table_name, predicate.column, predicate.op, repr(predicate.value))
        if key in self._selectivity_cache:
            return self._selectivity_cache[key]

        total = self.table_row_count(catalog.table_name)
        if total == 0:
            raise DbmsError(f'Table {catalog.table_name} is empty')
        rows = self.execute(count_statement(Query((predicate,)), catalog.table_name), fetch=True)
        value = int(rows[0][0]) / total
        self._selectivity_cache[key] = value

        return value

    def plan_cost(self, statement: Union[str, sql.Composable]) -> float:
        """
        Optimizer estimate for a statement; nothing is executed
        """
        if isinstance(statement, str):
            statement = sql.SQL(statement)
        rows = self.execute(sql.SQL('EXPLAIN (FORMAT JSON) ') + statement, fetch=True)
        if not rows:
            raise PlanParseError('EXPLAIN returned no rows')

        return extract_total_cost(rows[0][0])

    def existing_indexes(self, catalog: Catalog) -> List[str]:
        rows = self.execute('SELECT indexname FROM pg_indexes WHERE tablename = %s AND indexname LIKE %s '
                            'ORDER BY indexname',
                            (catalog.table_name, INDEX_PREFIX.replace('_', r'\_') + '%'), fetch=True)
        return [r[0] for r in rows if r[0].startswith(INDEX_PREFIX)]

    def apply_config(self, config: IndexConfig, catalog: Catalog) -> None:
        for column in config.names(catalog):
            self.execute(sql.SQL('CREATE INDEX IF NOT EXISTS {} ON {} ({})').format(
                sql.Identifier(index_name(column)), sql.Identifier(catalog.table_name), sql.Identifier(column)))
            _logger.info(f'Index {index_name(column)} present')

    def clear_config(self, catalog: Catalog) -> None:
        for name in self.existing_indexes(catalog):
            self.execute(sql.SQL('DROP INDEX IF EXISTS {}').format(sql.Identifier(name)))
            _logger.info(f'Dropped index {name}')

    def refresh_statistics(self, catalog: Catalog) -> None:
        self.execute(sql.SQL('ANALYZE {}').format(sql.Identifier(catalog.table_name)))

    def live_query_costs(self,
                         workload: Workload,
                         config: IndexConfig,
                         catalog: Catalog,
                         persist: bool = False) -> List[float]:
        """
        Plan cost of every query with exactly the nodba indexes of config in place. Unless persist is set, the
        nodba indexes that existed before the call are restored afterwards, also when a statement fails.
        """
        prior = self.existing_indexes(catalog)
        succeeded = False
        try:
            self.clear_config(catalog)
            self.apply_config(config, catalog)
            self.refresh_statistics(catalog)
            costs = [self.plan_cost(count_statement(q, catalog.table_name)) for q in workload.queries]
            succeeded = True
            return costs
        finally:
            if not (persist and succeeded):
                self._restore(prior, catalog)

    def live_workload_cost(self, workload: Workload, config: IndexConfig, catalog: Catalog,
                           persist: bool = False) -> float:
        return sum(self.live_query_costs(workload, config, catalog, persist))

    def _restore(self, prior: List[str], catalog: Catalog) -> None:
        try:
            self.clear_config(catalog)
            columns = [name[len(INDEX_PREFIX):] for name in prior]
            self.apply_config(IndexConfig.from_names(columns, catalog), catalog)
        except NoDBAError as e:
            _logger.error(f'Could not restore the previous nodba indexes: {e}')


class LiveCostProvider(CostProvider):
    """
    cost(L) from the database optimizer. Units are not comparable with AnalyticCostProvider costs, and the
    underlying connection allows no concurrent use.
    """
    capability = LIVE

    def __init__(self, connection: DbConnection):
        self.connection = connection

    def query_costs(self, workload: Workload, config: IndexConfig, catalog: Catalog) -> List[float]:
        return self.connection.live_query_costs(workload, config, catalog)

    def predicate_selectivity(self, predicate: Predicate, catalog: Catalog) -> float:
        return self.connection.measure_selectivity(predicate, catalog)
