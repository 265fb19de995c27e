"""Weight-distribution analysis of irregular doubly-generalized LDPC ensembles."""

__version__ = "0.1.0"
