"""Exception types shared across the package."""


class QcbenchError(Exception):
    """Base class for all package errors."""


class CircuitError(QcbenchError):
    """Invalid circuit construction or transformation."""


class SimulationError(QcbenchError):
    """Simulation precondition violated (width cap, unbound slots, ...)."""


class NoiseModelError(QcbenchError):
    """Invalid noise-model parameters."""


class RuleViolation(QcbenchError):
    """A benchmark run was requested with a forbidden optimization.

    The message names the violated rule (the quantum-volume do/don't table
    row or the optimization rule number).
    """


class LayoutError(QcbenchError):
    """No embedding of the circuit's interaction graph into the coupling map."""


class LedgerError(QcbenchError):
    """Overhead ledger does not reconcile with executed totals."""


class DegenerateTimer(QcbenchError):
    """CLOPS timer measured zero elapsed time."""


class GammaCapExceeded(QcbenchError):
    """Quasi-probability sampling overhead exceeds the configured cap."""


class FitError(QcbenchError):
    """Degenerate or failed curve fit."""


class DistributionError(QcbenchError):
    """Invalid probability distribution or counts object."""
