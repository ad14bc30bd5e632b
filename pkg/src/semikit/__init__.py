"""Chernoff approximations of operator semigroups on a periodic grid."""

__version__ = "0.1.0"
