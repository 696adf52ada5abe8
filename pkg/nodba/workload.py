"""
Conjunctive selection workloads: query model, random generation, JSON (de)serialization, SQL rendering and the
n x m selectivity matrix fed to the policy.
"""
import json
import pathlib
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from nodba.catalog import Catalog, ColumnStats, CATEGORICAL, DATE, DECIMAL, INTEGER, Literal, days_to_date
from nodba.errors import (ColumnNotFoundError, ProfileInfeasibleError, WorkloadParseError,
                          WorkloadValidationError, CatalogValidationError)
from nodba.utils.logger_utils import get_logger

_logger = get_logger()

EQ = 'eq'
LT = 'lt'
OPS = (EQ, LT)
_SQL_OPS = {EQ: '=', LT: '<'}

SelectivityFn = Callable[['Predicate', Catalog], float]


@dataclass(frozen=True)
class Predicate:
    """
    Attributes:
        column (str): Column name
        op (str): 'eq' or 'lt'
        value: Literal of the column's kind. Dates are ISO 'YYYY-MM-DD' strings
    """
    column: str
    op: str
    value: Literal

    def __post_init__(self):
        if self.op not in OPS:
            raise WorkloadValidationError(f'Unsupported operator {self.op!r} on {self.column}')


@dataclass(frozen=True)
class Query:
    predicates: Tuple[Predicate, ...]

    def __post_init__(self):
        object.__setattr__(self, 'predicates', tuple(self.predicates))
        if not self.predicates:
            raise WorkloadValidationError('A query needs at least one predicate')
        columns = [p.column for p in self.predicates]
        if len(set(columns)) != len(columns):
            raise WorkloadValidationError(f'At most one predicate per column allowed, got {columns}')

    @property
    def columns(self) -> List[str]:
        return [p.column for p in self.predicates]

    def predicate_on(self, column: str) -> Optional[Predicate]:
        for p in self.predicates:
            if p.column == column:
                return p
        return None


@dataclass(frozen=True)
class Workload:
    queries: Tuple[Query, ...]

    def __post_init__(self):
        object.__setattr__(self, 'queries', tuple(self.queries))
        if not self.queries:
            raise WorkloadValidationError('A workload needs at least one query')

    @property
    def n(self) -> int:
        return len(self.queries)

    def used_columns(self) -> List[str]:
        seen = []
        for q in self.queries:
            for c in q.columns:
                if c not in seen:
                    seen.append(c)
        return seen


@dataclass(frozen=True, eq=False)
class SelectivityMatrix:
    """
    Read-only n x m grid, values[i, j] = Sel(Q_i, C_j). Entries are 1.0 wherever query i has no predicate on
    column j.
    """
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise WorkloadValidationError('Selectivity matrix must be two-dimensional')
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise WorkloadValidationError('Selectivities must lie in [0, 1]')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def used_columns(self) -> np.ndarray:
        """Boolean mask of columns with at least one entry below 1"""
        return (self.values < 1.0).any(axis=0)


@dataclass
class GeneratorProfile:
    """
    Attributes:
        candidate_columns (list): Column names predicates may be placed on. None means every catalog column
        min_predicates (int): Lower bound of predicates per query
        max_predicates (int): Upper bound of predicates per query (inclusive)
        eq_probability (float): Probability of an equality predicate on ordered columns. Categorical columns and
            columns without an interior cut-point always get equality predicates
        min_workload_columns (int): When set, each workload draws its own column subset of at least this size from
            the candidates, and its queries place predicates only on that subset. The per-query predicate count is
            capped at the subset size. None means every query draws from all candidates
    """
    candidate_columns: Optional[List[str]] = None
    min_predicates: int = 4
    max_predicates: int = 6
    eq_probability: float = 0.5
    min_workload_columns: Optional[int] = None

    def resolve_candidates(self, catalog: Catalog) -> List[int]:
        if self.candidate_columns is None:
            return list(range(catalog.m))
        try:
            positions = sorted({catalog.column_index(c) for c in self.candidate_columns})
        except ColumnNotFoundError as e:
            raise ProfileInfeasibleError(str(e)) from e
        return positions

    def validate(self, catalog: Catalog) -> List[int]:
        candidates = self.resolve_candidates(catalog)
        if not candidates:
            raise ProfileInfeasibleError('Candidate column set is empty')
        if self.min_predicates < 1 or self.min_predicates > self.max_predicates:
            raise ProfileInfeasibleError(
                f'Invalid predicate range {self.min_predicates}-{self.max_predicates}')
        if self.max_predicates > len(candidates):
            raise ProfileInfeasibleError(
                f'Up to {self.max_predicates} predicates requested but only {len(candidates)} candidate columns')
        if not 0.0 <= self.eq_probability <= 1.0:
            raise ProfileInfeasibleError('eq_probability must lie in [0, 1]')
        if self.min_workload_columns is not None and not 1 <= self.min_workload_columns <= len(candidates):
            raise ProfileInfeasibleError(
                f'min_workload_columns must lie in [1, {len(candidates)}], got {self.min_workload_columns}')
        return candidates


def validate_predicate(predicate: Predicate, catalog: Catalog) -> None:
    try:
        stats = catalog.column(predicate.column)
    except ColumnNotFoundError as e:
        raise WorkloadValidationError(str(e)) from e

    if stats.kind == CATEGORICAL:
        if predicate.op != EQ:
            raise WorkloadValidationError(f'{stats.name}: only equality is allowed on categorical columns')
        if not isinstance(predicate.value, str):
            raise WorkloadValidationError(f'{stats.name}: categorical literal must be a string')
        if stats.categories is not None and predicate.value not in stats.categories:
            raise WorkloadValidationError(f'{stats.name}: unknown category {predicate.value!r}')
        return

    try:
        v = stats.to_internal(predicate.value)
    except CatalogValidationError as e:
        raise WorkloadValidationError(str(e)) from e
    # range cut-points outside the domain are legal and clamp; equality literals must be in the domain
    if predicate.op == EQ and not stats.min_value <= v <= stats.max_value:
        raise WorkloadValidationError(
            f'{stats.name}: value {predicate.value!r} outside [{stats.min_value}, {stats.max_value}]')


def validate_workload(workload: Workload, catalog: Catalog) -> None:
    for query in workload.queries:
        for predicate in query.predicates:
            validate_predicate(predicate, catalog)


def predicate_selectivity(predicate: Predicate, stats: ColumnStats) -> float:
    if predicate.op == EQ:
        return 1.0 / stats.distinct_count

    lo, hi = stats.min_value, stats.max_value
    if hi == lo:
        return 1.0
    v = stats.to_internal(predicate.value)

    return float(min(max((v - lo) / (hi - lo), 0.0), 1.0))


def selectivity(query: Query, column_pos: int, catalog: Catalog) -> float:
    """
    Sel(Q, C_j) under the uniform assumption: 1 without a predicate on C_j, 1/distinct for equality, the clamped
    fraction of the domain below the cut-point for '<'
    """
    stats = catalog.columns[column_pos]
    predicate = query.predicate_on(stats.name)
    if predicate is None:
        return 1.0

    return predicate_selectivity(predicate, stats)


def analytic_selectivity(predicate: Predicate, catalog: Catalog) -> float:
    return predicate_selectivity(predicate, catalog.column(predicate.column))


def build_matrix(workload: Workload, catalog: Catalog, selectivity_fn: SelectivityFn = None) -> SelectivityMatrix:
    """
    Selectivity matrix of a validated workload. selectivity_fn maps (predicate, catalog) to Sel and defaults to the
    uniform estimate; a measured source plugs in here
    """
    validate_workload(workload, catalog)
    selectivity_fn = selectivity_fn or analytic_selectivity
    values = np.ones((workload.n, catalog.m), dtype=np.float64)
    for i, query in enumerate(workload.queries):
        for predicate in query.predicates:
            j = catalog.column_index(predicate.column)
            values[i, j] = selectivity_fn(predicate, catalog)

    return SelectivityMatrix(values)


def _grid_point(stats: ColumnStats, k: int) -> float:
    """k-th of distinct_count evenly spaced values across [min, max]"""
    lo, hi = stats.min_value, stats.max_value
    return lo if stats.distinct_count == 1 else lo + k * (hi - lo) / (stats.distinct_count - 1)


def _grid_value(stats: ColumnStats, rng: np.random.Generator) -> Literal:
    k = int(rng.integers(0, stats.distinct_count))
    if stats.kind == CATEGORICAL:
        if stats.categories is not None:
            return stats.categories[k]
        # no labels recorded: synthetic, distinct tokens stand in for the real values
        return f'{stats.name}_{k}'

    point = _grid_point(stats, k)
    if stats.kind == INTEGER:
        return int(round(point))
    if stats.kind == DATE:
        return days_to_date(int(round(point)))

    return float(round(point, 2))


def has_interior_cut_point(stats: ColumnStats) -> bool:
    """True if some grid value lies strictly between min and max"""
    if stats.kind == CATEGORICAL or stats.distinct_count < 3:
        return False
    span = stats.max_value - stats.min_value
    return span > 0 if stats.kind == DECIMAL else span >= 2


def _cut_point(stats: ColumnStats, rng: np.random.Generator) -> Literal:
    """
    Grid value strictly inside (min, max), so '<' on it keeps some rows and drops some
    """
    lo, hi = stats.min_value, stats.max_value
    point = _grid_point(stats, int(rng.integers(1, stats.distinct_count - 1)))
    if stats.kind == DECIMAL:
        rounded = round(point, 2)
        return float(rounded if lo < rounded < hi else point)
    v = min(max(int(round(point)), int(lo) + 1), int(hi) - 1)

    return days_to_date(v) if stats.kind == DATE else v


def generate_workload(catalog: Catalog, n: int, profile: GeneratorProfile = None, seed: int = 0) -> Workload:
    """
    Random conjunctive workload, fully determined by (catalog, n, profile, seed)

    Parameters
    ----------
    catalog : Catalog
        Column statistics values are drawn from
    n : int
        Number of queries
    profile : GeneratorProfile
        Candidate columns, predicate-count range and equality probability
    seed : int
        Seed of the private random generator

    Returns
    -------
    Workload
    """
    profile = profile or GeneratorProfile()
    if n < 1:
        raise WorkloadValidationError('n must be at least 1')
    candidates = profile.validate(catalog)
    rng = np.random.default_rng(seed)
    if profile.min_workload_columns is not None:
        size = int(rng.integers(profile.min_workload_columns, len(candidates) + 1))
        candidates = sorted(candidates[p] for p in rng.choice(len(candidates), size=size, replace=False))

    queries = []
    for _ in range(n):
        count = int(rng.integers(profile.min_predicates, profile.max_predicates + 1))
        count = min(count, len(candidates))
        picked = sorted(candidates[p] for p in rng.choice(len(candidates), size=count, replace=False))
        predicates = []
        for j in picked:
            stats = catalog.columns[j]
            use_eq = rng.random() < profile.eq_probability
            if not has_interior_cut_point(stats):
                use_eq = True
            if use_eq:
                predicates.append(Predicate(stats.name, EQ, _grid_value(stats, rng)))
            else:
                predicates.append(Predicate(stats.name, LT, _cut_point(stats, rng)))
        queries.append(Query(tuple(predicates)))

    return Workload(tuple(queries))


def workload_to_dict(workload: Workload) -> Dict[str, Any]:
    return {'queries': [{'predicates': [{'column': p.column, 'op': p.op, 'value': p.value}
                                        for p in q.predicates]}
                        for q in workload.queries]}


def workload_from_dict(raw: Dict[str, Any]) -> Workload:
    try:
        queries = []
        for q in raw['queries']:
            predicates = []
            for p in q['predicates']:
                value = p['value']
                if isinstance(value, bool) or not isinstance(value, (int, float, str)):
                    raise WorkloadParseError(f'Unsupported literal {value!r}')
                predicates.append(Predicate(column=p['column'], op=p['op'], value=value))
            queries.append(Query(tuple(predicates)))
    except (KeyError, TypeError) as e:
        raise WorkloadParseError(f'Malformed workload: {e}') from e

    return Workload(tuple(queries))


def parse_workload(path: Union[str, pathlib.Path]) -> Workload:
    path = pathlib.Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise WorkloadParseError(f'{path}: {e}') from e

    return workload_from_dict(raw)


def write_workload(workload: Workload, path: Union[str, pathlib.Path]) -> None:
    pathlib.Path(path).write_text(json.dumps(workload_to_dict(workload), indent=2) + '\n')


def _sql_literal(value: Literal) -> str:
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    return repr(value)


def to_sql(query: Query, table: str) -> str:
    """
    SELECT count(*) FROM <table> WHERE c1 = v1 AND c2 < v2 ...

    Display text for reports and logs. Statements sent to a database are composed with psycopg2.sql instead
    """
    conditions = ' AND '.join(f'{p.column} {_SQL_OPS[p.op]} {_sql_literal(p.value)}' for p in query.predicates)

    return f'SELECT count(*) FROM {table} WHERE {conditions}'


def workload_columns(workloads: Sequence[Workload]) -> List[str]:
    """Union of used columns, in first-seen order"""
    seen = []
    for w in workloads:
        for c in w.used_columns():
            if c not in seen:
                seen.append(c)
    return seen
