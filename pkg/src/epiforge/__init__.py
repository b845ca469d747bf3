"""Epidemic decision-support engine: rate analytics, correlation studies,
SIRD calibration, and scenario projection behind a JSON API."""

__version__ = "0.1.0"
