"""
Exception hierarchy shared by every nodba module. Validation-style errors also derive from ValueError so callers
that only know the builtin types can still catch them.
"""


class NoDBAError(Exception):
    """Base class for all errors raised by nodba."""


class ConfigError(NoDBAError, ValueError):
    pass


class UsageError(NoDBAError):
    """Raised by pipeline jobs for bad command-line input. The CLI maps it to exit code 2."""


class CatalogParseError(NoDBAError, ValueError):
    pass


class CatalogValidationError(NoDBAError, ValueError):
    pass


class ColumnNotFoundError(NoDBAError, KeyError):

    def __init__(self, name: str, table: str = None):
        self.name = name
        self.table = table
        where = f' in table {table}' if table else ''
        super().__init__(f'Unknown column {name!r}{where}')

    def __str__(self):
        return self.args[0]


class WorkloadParseError(NoDBAError, ValueError):
    pass


class WorkloadValidationError(NoDBAError, ValueError):
    pass


class ProfileInfeasibleError(NoDBAError, ValueError):
    pass


class WorkloadTooLargeError(NoDBAError, ValueError):
    pass


class IllegalActionError(NoDBAError, ValueError):
    pass


class RewardDomainError(NoDBAError, ValueError):
    pass


class AllMaskedError(NoDBAError, ValueError):
    pass


class DimensionMismatchError(NoDBAError, ValueError):
    pass


class PolicyParseError(NoDBAError, ValueError):
    pass


class ArchMismatchError(NoDBAError, ValueError):
    pass


class EnumerationTooLargeError(NoDBAError, ValueError):
    pass


class DbmsError(NoDBAError, RuntimeError):
    """Connection, statement or DDL failure on the live database."""


class PlanParseError(DbmsError):
    pass
