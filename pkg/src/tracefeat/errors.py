class ContractError(ValueError):
    """An operation was called with arguments outside its documented domain."""


class DataError(RuntimeError):
    """Input data (corpus, cache, reports) is missing, corrupt or inconsistent."""
