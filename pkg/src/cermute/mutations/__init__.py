"""Human-error mutations and mutant catalog generation."""

from .apply import (
    ADD,
    DISORDER,
    FRESH_DRAW,
    REPLACE,
    SKIP,
    CatalogLabel,
    MatchingMutation,
    MutatedModel,
    MutationDescriptor,
    MutationError,
    mutate_add,
    mutate_disorder,
    mutate_replace,
    mutate_skip,
    type_environment,
    with_rules,
)
from .binding import AgentChain, BindingError, extract_chains, human_chain
from .catalog import MutationConfig, catalog_json, enumerate_mutants, rule_diff

__all__ = [
    "ADD",
    "AgentChain",
    "BindingError",
    "CatalogLabel",
    "DISORDER",
    "FRESH_DRAW",
    "MatchingMutation",
    "MutatedModel",
    "MutationConfig",
    "MutationDescriptor",
    "MutationError",
    "REPLACE",
    "SKIP",
    "catalog_json",
    "enumerate_mutants",
    "extract_chains",
    "human_chain",
    "mutate_add",
    "mutate_disorder",
    "mutate_replace",
    "mutate_skip",
    "rule_diff",
    "type_environment",
    "with_rules",
]
