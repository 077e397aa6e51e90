"""Home-cage behavior pipeline.

Turns per-frame animal detections and keypoint estimates into cleaned pose
time series, behavioral windows, a 2-D manifold embedding of stereotyped
behavior, and edge-ensemble visualizations of selected clusters.
"""

__version__ = "0.1.0"
