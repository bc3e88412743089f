"""Trace-driven VM placement simulator with the ReAssigner intensifier."""

from vmplace._core import (
    __version__,
    alw,
    categorize,
    cli,
    gen_trace,
    heterogeneity,
    run_experiment,
    solve_assignment,
)

__all__ = [
    "__version__",
    "alw",
    "categorize",
    "cli",
    "gen_trace",
    "heterogeneity",
    "run_experiment",
    "solve_assignment",
]
