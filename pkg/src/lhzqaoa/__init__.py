"""Parity-encoded (LHZ) QAOA: encoding, constraint-circuit compilation,
statevector simulation and Monte Carlo parameter search."""

__version__ = "0.1.0"

RNG_ALGORITHM = "numpy.PCG64"
