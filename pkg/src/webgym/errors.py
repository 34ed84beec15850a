"""Shared error types."""


class ConfigurationError(Exception):
    """Invalid flags, manifests, or CLI arguments. Exit code 2 territory."""


class SetupError(Exception):
    """A task's setup failed; treated as a system failure (relaunchable)."""
