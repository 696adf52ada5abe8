"""
Statistics-only table catalog. Columns carry just enough per-column statistics (kind, distinct count, domain
endpoints, category labels) to compute predicate selectivities under a uniform-distribution assumption.
"""
import datetime
import json
import pathlib
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple, Union

from nodba.errors import CatalogParseError, CatalogValidationError, ColumnNotFoundError
from nodba.utils.logger_utils import get_logger

_logger = get_logger()

EPOCH = datetime.date(1970, 1, 1)

INTEGER = 'integer'
DECIMAL = 'decimal'
DATE = 'date'
CATEGORICAL = 'categorical'
KINDS = (INTEGER, DECIMAL, DATE, CATEGORICAL)
ORDERED_KINDS = (INTEGER, DECIMAL, DATE)

Literal = Union[int, float, str]


def date_to_days(value: Union[str, datetime.date]) -> int:
    """
    ISO-8601 'YYYY-MM-DD' string (or date) to a day offset from 1970-01-01
    """
    if isinstance(value, str):
        try:
            value = datetime.date.fromisoformat(value)
        except ValueError as e:
            raise CatalogValidationError(f'Invalid ISO date {value!r}') from e

    return (value - EPOCH).days


def days_to_date(days: int) -> str:
    return (EPOCH + datetime.timedelta(days=int(days))).isoformat()


def _is_positive_count(value) -> bool:
    # bool is an int subclass
    return isinstance(value, int) and not isinstance(value, bool) and value >= 1


@dataclass(frozen=True)
class ColumnStats:
    """
    Attributes:
        name (str): Column name
        kind (str): One of integer, decimal, date, categorical
        distinct_count (int): Number of distinct values, at least 1
        min_value / max_value: Domain endpoints for ordered kinds. Dates are stored as day offsets from 1970-01-01
        categories (tuple): Optional category labels (categorical only). When present, their count equals
            distinct_count
    """
    name: str
    kind: str
    distinct_count: int
    min_value: Optional[float] = None
    max_value: Optional[float] = None
    categories: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CatalogValidationError(f'Column {self.name}: unknown kind {self.kind!r}')
        if not _is_positive_count(self.distinct_count):
            raise CatalogValidationError(f'Column {self.name}: distinct_count must be a positive integer')
        if self.is_ordered:
            if self.min_value is None or self.max_value is None:
                raise CatalogValidationError(f'Column {self.name}: {self.kind} columns need min and max')
            if self.min_value > self.max_value:
                raise CatalogValidationError(f'Column {self.name}: min {self.min_value} > max {self.max_value}')
            if self.categories is not None:
                raise CatalogValidationError(f'Column {self.name}: categories only apply to categorical columns')
        else:
            if self.min_value is not None or self.max_value is not None:
                raise CatalogValidationError(f'Column {self.name}: categorical columns carry no min or max')
            if self.categories is None:
                return
            if len(set(self.categories)) != len(self.categories):
                raise CatalogValidationError(f'Column {self.name}: duplicate category labels')
            if len(self.categories) != self.distinct_count:
                raise CatalogValidationError(
                    f'Column {self.name}: {len(self.categories)} categories but distinct_count={self.distinct_count}')

    @property
    def is_ordered(self) -> bool:
        return self.kind in ORDERED_KINDS

    def to_internal(self, value: Literal) -> float:
        """
        Map a literal of this column onto the numeric domain used for range arithmetic
        """
        if self.kind == DATE:
            if not isinstance(value, str):
                raise CatalogValidationError(f'Column {self.name}: date literals must be ISO strings, got {value!r}')
            return date_to_days(value)
        if self.kind == CATEGORICAL:
            raise CatalogValidationError(f'Column {self.name}: categorical values have no numeric domain')
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise CatalogValidationError(f'Column {self.name}: expected a number, got {value!r}')

        return value


@dataclass(frozen=True)
class Catalog:
    """
    Attributes:
        table_name (str): Table the statistics describe
        row_count (int): N, number of rows
        columns (tuple): ColumnStats in fixed order. Position j is the column id used by matrix columns, index
            bitlists and actions
    """
    table_name: str
    row_count: int
    columns: Tuple[ColumnStats, ...]

    def __post_init__(self):
        if not _is_positive_count(self.row_count):
            raise CatalogValidationError('row_count must be a positive integer')
        if not self.columns:
            raise CatalogValidationError('A catalog needs at least one column')
        names = [c.name for c in self.columns]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise CatalogValidationError(f'Duplicate column names: {duplicates}')
        object.__setattr__(self, '_positions', {n: j for j, n in enumerate(names)})

    @property
    def m(self) -> int:
        return len(self.columns)

    @property
    def column_names(self) -> List[str]:
        return [c.name for c in self.columns]

    def column_index(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise ColumnNotFoundError(name, self.table_name) from None

    def column(self, name: str) -> ColumnStats:
        return self.columns[self.column_index(name)]


def column_index(catalog: Catalog, name: str) -> int:
    return catalog.column_index(name)


def _parse_column(raw: Dict[str, Any]) -> ColumnStats:
    try:
        name = raw['name']
        kind = raw['kind']
        distinct = raw['distinct']
    except (KeyError, TypeError) as e:
        raise CatalogParseError(f'Column entry missing field: {e}') from e

    lo, hi = raw.get('min'), raw.get('max')
    if kind == DATE:
        lo = date_to_days(lo) if lo is not None else None
        hi = date_to_days(hi) if hi is not None else None
    categories = raw.get('categories')

    return ColumnStats(name=name,
                       kind=kind,
                       distinct_count=distinct,
                       min_value=lo,
                       max_value=hi,
                       categories=tuple(categories) if categories is not None else None)


def catalog_from_dict(raw: Dict[str, Any]) -> Catalog:
    if not isinstance(raw, dict):
        raise CatalogParseError('Catalog JSON must be an object')
    try:
        columns = tuple(_parse_column(c) for c in raw['columns'])
        return Catalog(table_name=raw['table'], row_count=raw['row_count'], columns=columns)
    except (KeyError, TypeError) as e:
        raise CatalogParseError(f'Malformed catalog: {e}') from e


def catalog_to_dict(catalog: Catalog) -> Dict[str, Any]:
    columns = []
    for c in catalog.columns:
        lo, hi = c.min_value, c.max_value
        if c.kind == DATE:
            lo, hi = days_to_date(lo), days_to_date(hi)
        columns.append({'name': c.name,
                        'kind': c.kind,
                        'distinct': c.distinct_count,
                        'min': lo,
                        'max': hi,
                        'categories': list(c.categories) if c.categories is not None else None})

    return {'table': catalog.table_name, 'row_count': catalog.row_count, 'columns': columns}


def load_catalog(path: Union[str, pathlib.Path]) -> Catalog:
    """
    Load and validate a catalog JSON file. Column order is preserved from the file

    Parameters
    ----------
    path : str or pathlib.Path
        Catalog JSON file

    Returns
    -------
    Catalog
    """
    path = pathlib.Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise CatalogParseError(f'{path}: {e}') from e
    catalog = catalog_from_dict(raw)
    _logger.info(f'Loaded catalog {catalog.table_name} from {path}: m={catalog.m}, N={catalog.row_count}')

    return catalog
