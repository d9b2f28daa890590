"""nullgeo: pointwise verification for null submanifolds of indefinite
almost contact metric manifolds."""

__version__ = "0.1.0"
