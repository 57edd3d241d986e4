"""
Spectral Miner - Command Line Interface

Commands: synth, train, eval, cv, export.
"""

from cli.main import build_parser, main

__all__ = ["build_parser", "main"]
