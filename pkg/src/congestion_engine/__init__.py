"""Decision engine for connected vehicles: route prediction, obstruction
parsing, stochastic link admission and load balancing."""

__version__ = "0.1.0"
