"""Security-ceremony modeling, human-error mutation, and bounded trace
analysis: model ceremonies as multiset rewriting theories, derive
human-error mutants with matching partner mutations, and check quantified
trace goals over the bounded execution space."""

__version__ = "0.1.0"
