"""Forecast researchers' numbers of coauthors and publications.

The model learns inhomogeneous Poisson rates of publishing and of meeting
new coauthors from publication histories, adjusts the coauthor rate for
cumulative advantage, and simulates future trajectories.
"""

__version__ = "0.1.0"
