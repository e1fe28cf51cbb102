"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid network, scenario or stream configuration."""


class ScenarioError(ConfigError):
    """Scenario file failed validation; message carries the offending field."""


class FramingError(ValueError):
    """Wire-level framing violation (short read, malformed word)."""


class LinkTimeout(RuntimeError):
    """Handshake did not complete within the configured timeout."""
