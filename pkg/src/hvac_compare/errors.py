"""Exception hierarchy.

Two families matter to callers: :class:`DataError` (bad inputs, exit code 2
in the CLI) and :class:`StatisticalError` (the inference machinery could not
produce a trustworthy answer, exit code 3).
"""


class HvacCompareError(Exception):
    """Base class for every error raised by this package."""

    module = "hvac_compare"


class DataError(HvacCompareError):
    pass


class StatisticalError(HvacCompareError):
    pass


# -- ingest ------------------------------------------------------------------

class SchemaError(DataError):
    module = "ingest"

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"schema error: column {column!r}")


class ParseError(DataError):
    module = "ingest"

    def __init__(self, row, column, token):
        self.row = row
        self.column = column
        self.token = token
        super().__init__(f"row {row}, column {column!r}: cannot parse {token!r}")


class EmptyFile(DataError):
    module = "ingest"


class ConfigError(DataError):
    module = "ingest"

    def __init__(self, key, constraint):
        self.key = key
        self.constraint = constraint
        super().__init__(f"config key {key!r}: {constraint}")


# -- datamodel ---------------------------------------------------------------

class InvalidDataset(DataError):
    module = "datamodel"

    def __init__(self, label, violations):
        self.violations = list(violations)
        shown = ", ".join(str(v) for v in self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" (+{len(self.violations) - 5} more)"
        super().__init__(f"dataset {label!r} is invalid: {shown}{more}")


class IncomparableConfigs(DataError):
    module = "datamodel"


class InsufficientOverlap(DataError):
    module = "datamodel"


# -- smooth ------------------------------------------------------------------

class DegenerateNeighborhood(StatisticalError):
    module = "smooth"

    def __init__(self, t, h, count):
        self.t = t
        self.h = h
        self.count = count
        super().__init__(
            f"only {count} points within bandwidth {h:g} of t={t:g} after widening"
        )


class BandwidthFailure(StatisticalError):
    module = "smooth"


class FitFailure(StatisticalError):
    module = "smooth"


# -- aggregate ---------------------------------------------------------------

class EmptyInterval(DataError):
    module = "aggregate"

    def __init__(self, a, b, hour=None):
        self.a = a
        self.b = b
        self.hour = hour
        where = "" if hour is None else f" for hour {hour}"
        super().__init__(f"empty OAT interval [{a:g}, {b:g}]{where}")


# -- infer -------------------------------------------------------------------

class TestFailure(StatisticalError):
    module = "infer"
    __test__ = False  # keep pytest from collecting this


class DegenerateBootstrap(StatisticalError):
    module = "infer"
