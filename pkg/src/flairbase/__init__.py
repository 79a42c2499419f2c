"""FLAIR histogram-equalization anomaly segmentation baseline."""
__version__ = "0.1.0"
