"""Even/odd exterior forms, chain integration and induction laws for moving bodies."""

__version__ = "0.1.0"
