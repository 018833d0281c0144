"""Exception types shared across the package."""


class DeskQaError(Exception):
    """Base class for all deskqa errors."""


class DocumentLoadError(DeskQaError):
    """A single document could not be loaded."""


class CorpusIngestError(DeskQaError):
    """Every document in a corpus failed to ingest."""


class SnapshotError(DeskQaError):
    """An index snapshot is missing, corrupt, or incompatible."""


class ProviderError(DeskQaError):
    """An embedding provider failed or violated its contract."""


class BackendError(DeskQaError):
    """A completion backend failed after its configured retries."""


class PromptBudgetError(DeskQaError):
    """The undroppable parts of a prompt exceed the token budget."""


class DictionaryError(DeskQaError):
    """The abbreviation dictionary file is invalid."""


class DatasetError(DeskQaError):
    """An evaluation dataset file is missing or malformed."""


class ConfigError(DeskQaError):
    """The application configuration is invalid."""
