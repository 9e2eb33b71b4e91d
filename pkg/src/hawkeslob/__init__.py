"""Hawkes-driven limit order book simulator with fitting, reconstruction and statistics."""
from .agents import VARIANTS, AgentParams, BookEmptiedError, ModelVariant, run_simulation
from .hawkes import EventStream, ExponentialKernel, HawkesModelSpec, fit_mle, log_likelihood, simulate
from .lob import ASK, BID, OrderBook

__version__ = "0.1.0"
