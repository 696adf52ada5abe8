"""
Small catalogs, workloads and a fake DB-API connection shared by the unit tests.
"""
from typing import Dict, List
from unittest import mock

import psycopg2
from psycopg2 import sql

from nodba.catalog import Catalog, ColumnStats, load_catalog
from nodba.utils.config_utils import fixture_path
from nodba.workload import EQ, LT, Predicate, Query, Workload, parse_workload

TOY_OPTIMAL_COLUMN = 'c2'


def toy_catalog() -> Catalog:
    """
    Four integer columns over 1000 rows. c2 has 1000 distinct values, the others span 0..100
    """
    return Catalog(table_name='toy',
                   row_count=1000,
                   columns=(ColumnStats('c0', 'integer', 101, 0, 100),
                            ColumnStats('c1', 'integer', 101, 0, 100),
                            ColumnStats('c2', 'integer', 1000, 1, 1000),
                            ColumnStats('c3', 'integer', 101, 0, 100)))


def toy_workload() -> Workload:
    """
    One query: Sel(c2) = 0.001, every other column 0.9. Only an index on c2 beats the full scan
    """
    return Workload((Query((Predicate('c0', LT, 90),
                            Predicate('c1', LT, 90),
                            Predicate('c2', EQ, 500),
                            Predicate('c3', LT, 90))),))


def mixed_catalog() -> Catalog:
    """
    One column of every kind
    """
    return Catalog(table_name='orders',
                   row_count=10000,
                   columns=(ColumnStats('o_id', 'integer', 10000, 1, 10000),
                            ColumnStats('o_price', 'decimal', 5000, 0.0, 500.0),
                            ColumnStats('o_date', 'date', 2557, 8035, 10591),
                            ColumnStats('o_status', 'categorical', 3, categories=('F', 'O', 'P')),
                            ColumnStats('o_note', 'categorical', 9000)))


def lineitem_catalog() -> Catalog:
    return load_catalog(fixture_path('lineitem_sf1.json'))


def fixture_workload(name: str) -> Workload:
    return parse_workload(fixture_path(name))


def render(statement) -> str:
    """
    Text of a str or psycopg2.sql statement, identifiers double-quoted and literals inlined, without a live
    connection
    """
    if isinstance(statement, str):
        return statement
    if isinstance(statement, sql.Composed):
        return ''.join(render(part) for part in statement.seq)
    if isinstance(statement, sql.Identifier):
        return '.'.join(f'"{s}"' for s in statement.strings)
    if isinstance(statement, sql.SQL):
        return statement.string
    if isinstance(statement, sql.Literal):
        value = statement.wrapped
        return "'" + value.replace("'", "''") + "'" if isinstance(value, str) else repr(value)
    raise TypeError(f'Cannot render {statement!r}')


class FakeDatabase:
    """
    In-memory stand-in for one PostgreSQL table, driven through a unittest.mock DB-API connection.

    Plan cost of every query is base_cost minus 100 per nodba index present. count(*) of a single-predicate query
    returns matching_rows. Statements containing fail_on raise psycopg2.OperationalError.
    """
    def __init__(self, row_count: int = 1000, matching_rows: int = 250, base_cost: float = 1000.0,
                 indexes: List[str] = None, fail_on: str = None):
        self.row_count = row_count
        self.matching_rows = matching_rows
        self.base_cost = base_cost
        self.indexes = set(indexes or [])
        self.fail_on = fail_on
        self.statements: List[str] = []
        self._result = None

    def _execute(self, statement, params=None):
        text = render(statement)
        self.statements.append(text)
        if self.fail_on is not None and self.fail_on in text:
            raise psycopg2.OperationalError(f'forced failure on {self.fail_on}')

        self._result = None
        if text.startswith('EXPLAIN'):
            cost = self.base_cost - 100.0 * sum(1 for i in self.indexes if i.startswith('nodba_idx_'))
            self._result = [([{'Plan': {'Node Type': 'Seq Scan', 'Total Cost': cost}}],)]
        elif text.startswith('SELECT indexname'):
            self._result = [(name,) for name in sorted(self.indexes)]
        elif text.startswith('SELECT count(*)'):
            self._result = [(self.matching_rows if 'WHERE' in text else self.row_count,)]
        elif text.startswith('CREATE INDEX'):
            self.indexes.add(text.split('"')[1])
        elif text.startswith('DROP INDEX'):
            self.indexes.discard(text.split('"')[1])

    def _fetchall(self):
        return self._result

    def connection(self) -> mock.MagicMock:
        cursor = mock.MagicMock()
        cursor.execute.side_effect = self._execute
        cursor.fetchall.side_effect = self._fetchall
        cursor.__enter__.return_value = cursor
        cursor.__exit__.return_value = False

        conn = mock.MagicMock()
        conn.cursor.return_value = cursor
        return conn

    def executed(self, prefix: str) -> List[str]:
        return [s for s in self.statements if s.startswith(prefix)]


def explain_output(cost: float) -> List[Dict]:
    return [{'Plan': {'Node Type': 'Seq Scan', 'Total Cost': cost}}]
