"""Signbox - A benchmark for flex-sensor sign language gesture classifiers.

This package trains and evaluates recurrent and attention-based sequence
classifiers on 5-channel glove recordings, and simulates the live glove
pipeline through a stream segmentation engine.
"""

__version__ = "0.1.0"
__author__ = "strickvl"
__license__ = "MIT"
