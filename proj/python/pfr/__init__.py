"""Pseudoinverse-free randomized solvers with heavy-ball momentum."""

from ._pfr import (
    DivergenceError,
    DomainError,
    InadmissibleError,
    ParseError,
    PfrError,
    System,
    beta,
    default_stepsize,
    estimate_beta,
    gen_conditioned,
    gen_gaussian,
    gen_sparse,
    incidence_system,
    make_rhs,
    methods,
    rate_report,
    read_matrix_market,
    run_trials,
    solve,
    update_operator,
    write_matrix_market,
)

__all__ = [
    "DivergenceError",
    "DomainError",
    "InadmissibleError",
    "ParseError",
    "PfrError",
    "System",
    "beta",
    "default_stepsize",
    "estimate_beta",
    "gen_conditioned",
    "gen_gaussian",
    "gen_sparse",
    "incidence_system",
    "make_rhs",
    "methods",
    "rate_report",
    "read_matrix_market",
    "run_trials",
    "solve",
    "update_operator",
    "write_matrix_market",
]
