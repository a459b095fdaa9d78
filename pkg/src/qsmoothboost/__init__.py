"""Classical and quantum SmoothBoost with an AdaBoost baseline, on a simulated quantum backend."""
__version__ = "0.1.0"
