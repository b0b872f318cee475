"""Wavelet / LS-SVM / Markov hybrid forecasting with combination and ranking."""

__version__ = "0.1.0"
