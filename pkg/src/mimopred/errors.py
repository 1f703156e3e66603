class ConfigurationError(ValueError):
    """Raised when a scenario or component configuration is inconsistent."""
