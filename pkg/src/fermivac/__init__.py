"""Exact small-lattice checks of vacuum currents, Schwinger terms and gauge pumping."""

__version__ = "0.1.0"
