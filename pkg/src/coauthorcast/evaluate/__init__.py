"""Evaluation reports and descriptive diagnostics."""

from coauthorcast.evaluate.appendix import (AppendixReport, YearDiagnostics, advantage_slope,
                                            appendix_diagnostics)
from coauthorcast.evaluate.auc import (AucCounts, AucReport, auc_counts, auc_report,
                                       stratum_label)
from coauthorcast.evaluate.autocorr import (AutocorrelationReport, autocorrelation,
                                            grouped_autocorrelation)
from coauthorcast.evaluate.distribution import (POOLED, SINGLE, DistributionReport,
                                                YearDistribution, distribution_report)
from coauthorcast.evaluate.poisson_scan import (ANNUAL_PUBS, ANNUAL_PUBS_AND_COAUTHORS,
                                                GroupTest, PoissonScan, poisson_character_scan)
from coauthorcast.evaluate.trend import TrendReport, trend_report

__all__ = [
    "ANNUAL_PUBS", "ANNUAL_PUBS_AND_COAUTHORS", "AppendixReport", "AucCounts", "AucReport",
    "AutocorrelationReport", "DistributionReport", "GroupTest", "POOLED", "PoissonScan",
    "SINGLE", "TrendReport", "YearDiagnostics", "YearDistribution", "advantage_slope",
    "appendix_diagnostics", "auc_counts", "auc_report", "autocorrelation",
    "distribution_report", "grouped_autocorrelation", "poisson_character_scan",
    "stratum_label", "trend_report",
]
