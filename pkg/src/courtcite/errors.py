"""Exception hierarchy shared by all pipeline stages."""


class CourtCiteError(Exception):
    """Base class for every error raised deliberately by this package."""


class ConfigError(CourtCiteError):
    """Invalid or incomplete pipeline configuration."""


class DataError(CourtCiteError):
    """Input data that violates a documented format or invariant."""


class CorpusError(DataError):
    pass


class ModelFormatError(DataError):
    pass
