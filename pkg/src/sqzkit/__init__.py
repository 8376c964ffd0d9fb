"""Analysis toolkit for bright squeezed light from a waveguide OPA."""
__version__ = "0.1.0"
