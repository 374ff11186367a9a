"""Version information for PyNarxHysteresis."""
# pylint: disable=invalid-name

__version__ = "0.4.0"
