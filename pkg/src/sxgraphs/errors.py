class BudgetExceeded(RuntimeError):
    """An exact enumeration would exceed its configured budget."""


class SizeGateError(RuntimeError):
    """A dense computation was requested above the configured size limit."""


class ConfigError(ValueError):
    """Invalid experiment or command configuration."""


class DisconnectedGraphError(ValueError):
    """The operation needs a connected graph."""
