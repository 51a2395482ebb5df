class ConvergenceError(RuntimeError):
    """Shifted QR iteration exhausted its sweep budget."""
