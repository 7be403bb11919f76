"""Exception hierarchy shared across the package.

Errors fall into three CLI-visible categories: usage (exit 2), data
(exit 3) and numerical (exit 4). Every exception carries a short
machine-parsable category string.
"""


class SetarError(Exception):
    """Base class for all package errors."""

    category = "error"
    exit_code = 1


class UsageError(SetarError):
    category = "usage"
    exit_code = 2


class DataError(SetarError):
    category = "data"
    exit_code = 3


class NumericalError(SetarError):
    category = "numerical"
    exit_code = 4


class SeriesTooShort(DataError):
    def __init__(self, series_id, length, needed):
        self.series_id = series_id
        self.length = length
        self.needed = needed
        super().__init__(
            f"series {series_id!r} has {length} observations, needs at least {needed}"
        )


class CovariateMisaligned(DataError):
    def __init__(self, name, series_id):
        self.name = name
        self.series_id = series_id
        super().__init__(
            f"covariate {name!r} of series {series_id!r} does not match the series length"
        )


class UnknownCategory(DataError):
    def __init__(self, name, value):
        self.name = name
        self.value = value
        super().__init__(f"covariate {name!r} saw unseen category {value!r}")


class MissingFutureCovariates(DataError):
    def __init__(self, step):
        self.step = step
        super().__init__(f"no future covariate values supplied for forecast step {step}")


class MissingActuals(DataError):
    def __init__(self, series_id):
        self.series_id = series_id
        super().__init__(f"no actual values available for series {series_id!r}")


class LengthMismatch(DataError):
    pass


class EmptyTrainingSet(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class SingularSystem(NumericalError):
    pass


class InsufficientDf(NumericalError):
    def __init__(self, n, l):
        self.n = n
        self.l = l
        super().__init__(
            f"split F-test needs n - 2l - 2 >= 1 residual degrees of freedom, got n={n}, l={l}"
        )


class DegenerateColumn(DataError):
    def __init__(self, detail="column has no usable split thresholds"):
        super().__init__(detail)


class ZeroDenominator(DataError):
    pass


class NonConvergence(NumericalError):
    pass


class DivergedSeries(NumericalError):
    def __init__(self, series_id, value):
        self.series_id = series_id
        super().__init__(f"series {series_id!r} diverged (|value| reached {value:g})")
