class CapacityError(ValueError):
    """A dense table would exceed the size budget (|Y|^(k+1) > 2**28)."""


class BudgetError(ValueError):
    """An exhaustive enumeration would exceed its candidate budget."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""
