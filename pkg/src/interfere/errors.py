class ConsistencyError(RuntimeError):
    """An internal invariant failed; indicates a tolerance or implementation bug."""
