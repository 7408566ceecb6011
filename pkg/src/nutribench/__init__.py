"""nutribench: generate, collect, parse, and score LLM meal plans."""

__version__ = "0.1.0"
