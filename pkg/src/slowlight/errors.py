"""Exception types shared across the package.

The CLI maps these onto process exit codes, so solver code should raise
the most specific one that applies.
"""


class SlowlightError(Exception):
    """Base class for everything raised deliberately by this package."""


class ConfigError(SlowlightError):
    """Bad or inconsistent user input (config file, preset overrides, CLI args)."""


class NumericalError(SlowlightError):
    """The integration left its validity domain (CFL violation, boundary hit, ...)."""


class AnalysisError(SlowlightError):
    """Post-processing could not produce a meaningful result."""
