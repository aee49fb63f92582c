"""Zero-point-field model of a radiation-damped electron and its stochastic-mechanics consequences."""

__version__ = "0.1.0"
