"""Wavelet local Whittle estimation of multivariate long memory."""

__version__ = "0.1.0"
