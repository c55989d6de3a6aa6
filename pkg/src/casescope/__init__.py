"""casescope: analytics engine for multimodal diagnostic case review."""

__version__ = "0.1.0"
