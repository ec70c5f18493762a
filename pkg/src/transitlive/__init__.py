"""Real-time transit tracking: static feed, GPS tracker, arrival prediction,
service alerts, HTTP API, and a deterministic feed simulator."""

__version__ = "0.1.0"
