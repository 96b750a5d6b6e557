"""Exception hierarchy shared across the package."""


class HeurevoError(Exception):
    """Base class for all package errors."""


class ConfigError(HeurevoError):
    """Invalid or inconsistent run configuration."""


class JournalError(HeurevoError):
    """Corrupt journal content or a digest mismatch during replay."""


class GatewayError(HeurevoError):
    """LLM gateway failure: exhausted retries, missing recording, bad script."""


class TemplateError(HeurevoError):
    """Unknown template id or unbound placeholder."""


class InstanceError(HeurevoError):
    """Malformed instance file or generator misuse."""


class WorkerError(HeurevoError):
    """External worker protocol violation or unexpected death."""


class EvolutionError(HeurevoError):
    """Unrecoverable search-loop failure (e.g. the seed does not evaluate)."""
