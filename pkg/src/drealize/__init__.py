"""Transfer-function realizations on the Drury-Arveson space."""

__version__ = "0.1.0"
