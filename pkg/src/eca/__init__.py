"""Energy-consumption analysis toolkit for the ECA language."""

__version__ = "0.1.0"
