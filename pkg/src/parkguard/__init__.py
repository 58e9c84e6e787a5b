"""Level-set model of extraction and patrol effectiveness in protected regions."""

__version__ = "0.1.0"
