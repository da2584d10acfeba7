"""Hedonic price models with AR(1) random time effects and stochastic volatility."""

from ._svare import (
    Dataset,
    default_point_counts,
    fit_are,
    fit_fe,
    fit_svare,
    gl_rule,
    load_csv,
    moments,
    price_index,
    simulate_svare,
    svare_loglik,
    svare_states,
)

__all__ = [
    "Dataset",
    "default_point_counts",
    "fit_are",
    "fit_fe",
    "fit_svare",
    "gl_rule",
    "load_csv",
    "moments",
    "price_index",
    "simulate_svare",
    "svare_loglik",
    "svare_states",
]

__version__ = "0.1.0"
