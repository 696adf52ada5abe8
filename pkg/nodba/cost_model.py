"""
What-if cost estimation. cost(L) of a workload under an index configuration L, answered analytically from catalog
statistics (AnalyticCostProvider) or by a live database (see nodba.dbms_connector.LiveCostProvider).
"""
import io
import json
import math
import pathlib
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, asdict
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from nodba.catalog import Catalog
from nodba.errors import ConfigError
from nodba.workload import Predicate, Query, Workload, analytic_selectivity, predicate_selectivity

ANALYTIC = 'analytic'
LIVE = 'live'

DEFAULT_FETCH_PENALTY = 2.0


@dataclass(frozen=True)
class IndexConfig:
    """
    Index configuration L as an m-length bitlist plus the budget k

    Attributes:
        bits (tuple): bits[j] == 1 iff column j is indexed
        k (int): Maximum number of indexes
    """
    bits: Tuple[int, ...]
    k: int

    def __post_init__(self):
        object.__setattr__(self, 'bits', tuple(int(b) for b in self.bits))
        if any(b not in (0, 1) for b in self.bits):
            raise ConfigError('Index bits must be 0 or 1')
        if self.k < 0:
            raise ConfigError('k must be non-negative')
        if self.count > self.k:
            raise ConfigError(f'{self.count} indexes exceed the budget k={self.k}')

    @classmethod
    def empty(cls, m: int, k: int) -> 'IndexConfig':
        return cls((0,) * m, k)

    @classmethod
    def all_indexed(cls, m: int) -> 'IndexConfig':
        return cls((1,) * m, m)

    @classmethod
    def from_columns(cls, positions: Iterable[int], m: int, k: int) -> 'IndexConfig':
        bits = [0] * m
        for j in positions:
            if not 0 <= j < m:
                raise ConfigError(f'Column position {j} outside [0, {m})')
            bits[j] = 1
        return cls(tuple(bits), k)

    @classmethod
    def from_names(cls, names: Iterable[str], catalog: Catalog, k: Optional[int] = None) -> 'IndexConfig':
        positions = [catalog.column_index(name) for name in names]
        return cls.from_columns(positions, catalog.m, len(set(positions)) if k is None else k)

    @property
    def m(self) -> int:
        return len(self.bits)

    @property
    def count(self) -> int:
        return sum(self.bits)

    @property
    def indexed_columns(self) -> Tuple[int, ...]:
        return tuple(j for j, b in enumerate(self.bits) if b)

    def with_index(self, j: int) -> 'IndexConfig':
        bits = list(self.bits)
        bits[j] = 1
        return IndexConfig(tuple(bits), self.k)

    def names(self, catalog: Catalog) -> List[str]:
        return [catalog.columns[j].name for j in self.indexed_columns]


def query_cost(query: Query,
               indexed_columns: Iterable[int],
               catalog: Catalog,
               fetch_penalty: float = DEFAULT_FETCH_PENALTY) -> float:
    """
    Cost of one query: full scan N, or the cheapest usable single-column index path log2(N) + F * Sel * N, whichever
    is lower. An index is usable only when the query has a predicate on its column.
    """
    n_rows = catalog.row_count
    cost = float(n_rows)
    for j in indexed_columns:
        stats = catalog.columns[j]
        predicate = query.predicate_on(stats.name)
        if predicate is None:
            continue
        index_path = math.log2(n_rows) + fetch_penalty * predicate_selectivity(predicate, stats) * n_rows
        cost = min(cost, index_path)

    return cost


def workload_cost(workload: Workload,
                  config: IndexConfig,
                  catalog: Catalog,
                  fetch_penalty: float = DEFAULT_FETCH_PENALTY) -> float:
    if config.m != catalog.m:
        raise ConfigError(f'Index config has {config.m} bits, catalog has {catalog.m} columns')
    indexed = config.indexed_columns

    return sum(query_cost(q, indexed, catalog, fetch_penalty) for q in workload.queries)


class CostProvider(ABC):
    """
    Source of cost(L). Implementations report per-query costs; the workload cost is their sum.
    """
    capability: str = None

    @abstractmethod
    def query_costs(self, workload: Workload, config: IndexConfig, catalog: Catalog) -> List[float]:
        pass

    def workload_cost(self, workload: Workload, config: IndexConfig, catalog: Catalog) -> float:
        return sum(self.query_costs(workload, config, catalog))

    def predicate_selectivity(self, predicate: Predicate, catalog: Catalog) -> float:
        """Sel of one predicate as this source sees it. Uniform estimate from the catalog unless overridden"""
        return analytic_selectivity(predicate, catalog)


class AnalyticCostProvider(CostProvider):
    """
    Stateless B-tree style cost model. Safe to share between threads.
    """
    capability = ANALYTIC

    def __init__(self, fetch_penalty: float = DEFAULT_FETCH_PENALTY):
        if fetch_penalty <= 0:
            raise ConfigError('fetch_penalty must be positive')
        self.fetch_penalty = fetch_penalty

    def query_costs(self, workload: Workload, config: IndexConfig, catalog: Catalog) -> List[float]:
        if config.m != catalog.m:
            raise ConfigError(f'Index config has {config.m} bits, catalog has {catalog.m} columns')
        indexed = config.indexed_columns
        return [query_cost(q, indexed, catalog, self.fetch_penalty) for q in workload.queries]

    def workload_cost(self, workload: Workload, config: IndexConfig, catalog: Catalog) -> float:
        return workload_cost(workload, config, catalog, self.fetch_penalty)

    def __repr__(self):
        return f'AnalyticCostProvider(fetch_penalty={self.fetch_penalty})'


@dataclass
class QueryCostRow:
    query: str
    no_index: float
    indexed_all: float
    configured: float


@dataclass
class CostReport:
    """
    Per-query costs under NoIndex (L = {}), IndexedAll (every column) and the given configuration. Totals are derived
    from the rows, so they always equal the column sums.
    """
    rows: List[QueryCostRow] = field(default_factory=list)
    capability: str = ANALYTIC

    @property
    def totals(self) -> QueryCostRow:
        return QueryCostRow(query='total',
                            no_index=sum(r.no_index for r in self.rows),
                            indexed_all=sum(r.indexed_all for r in self.rows),
                            configured=sum(r.configured for r in self.rows))

    def to_frame(self) -> pd.DataFrame:
        records = [asdict(r) for r in self.rows] + [asdict(self.totals)]
        return pd.DataFrame.from_records(records, columns=['query', 'no_index', 'indexed_all', 'configured'])

    def to_csv(self, path: Union[str, pathlib.Path, None] = None) -> str:
        text = self.to_frame().to_csv(index=False)
        if path is not None:
            pathlib.Path(path).write_text(text)
        return text

    def to_dict(self) -> dict:
        return {'capability': self.capability,
                'queries': [asdict(r) for r in self.rows],
                'totals': asdict(self.totals)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_csv(cls, source: Union[str, pathlib.Path, io.StringIO], capability: str = ANALYTIC) -> 'CostReport':
        frame = pd.read_csv(source, dtype={'query': str})
        frame = frame[frame['query'] != 'total']
        rows = [QueryCostRow(query=r.query,
                             no_index=float(r.no_index),
                             indexed_all=float(r.indexed_all),
                             configured=float(r.configured))
                for r in frame.itertuples(index=False)]
        return cls(rows=rows, capability=capability)


def cost_report(workload: Workload,
                config: IndexConfig,
                catalog: Catalog,
                provider: CostProvider = None) -> CostReport:
    provider = provider or AnalyticCostProvider()
    no_index = provider.query_costs(workload, IndexConfig.empty(catalog.m, config.k), catalog)
    indexed_all = provider.query_costs(workload, IndexConfig.all_indexed(catalog.m), catalog)
    configured = provider.query_costs(workload, config, catalog)

    rows = [QueryCostRow(query=f'Q{i + 1}', no_index=a, indexed_all=b, configured=c)
            for i, (a, b, c) in enumerate(zip(no_index, indexed_all, configured))]

    return CostReport(rows=rows, capability=provider.capability)


def used_column_positions(workloads: Sequence[Workload], catalog: Catalog) -> List[int]:
    """Sorted positions of every column some query predicates on"""
    return sorted({catalog.column_index(c) for w in workloads for c in w.used_columns()})
