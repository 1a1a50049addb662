"""Compile interval temporal logic specifications to automata and synthesize robust controllers."""

__version__ = "0.1.0"
