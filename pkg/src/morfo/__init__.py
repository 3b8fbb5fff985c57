"""Convolutional POS tagger and entity recognizer for morphologically rich languages."""

from morfo.errors import ConfigError, DataError, MorfoError, NumericError

__version__ = "0.1.0"

__all__ = ["ConfigError", "DataError", "MorfoError", "NumericError", "__version__"]
