"""qcbench: seeded quantum-benchmark harness on a built-in noisy simulator."""

__version__ = "0.1.0"
