"""landaulab: semiclassical spectral numerics for random Landau Hamiltonians."""

__version__ = "0.1.0"
