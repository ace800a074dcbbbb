"""Linear algebra and statistical tests over feature matrices."""

from .linalg import (
    AllConstant, CcaResult, DataMatrix, NotStandardized, ParallelAnalysis, PcaResult,
    RowCountMismatch, cca, correlation, is_standardized, parallel_analysis, pca,
    projection_matrix, random_eigenvalues, standardize, varimax_criterion, varimax_rotate,
)
from .stats import (
    DegenerateGroups, EmptyTable, TestResult, bonferroni, chi_squared, fisher_exact,
    homogeneity_test, mann_whitney, mann_whitney_clustering, midranks, pairwise_distances,
)

__all__ = [
    "AllConstant", "CcaResult", "DataMatrix", "NotStandardized", "ParallelAnalysis", "PcaResult",
    "RowCountMismatch", "cca", "correlation", "is_standardized", "parallel_analysis", "pca",
    "projection_matrix", "random_eigenvalues", "standardize", "varimax_criterion", "varimax_rotate",
    "DegenerateGroups", "EmptyTable", "TestResult", "bonferroni", "chi_squared", "fisher_exact",
    "homogeneity_test", "mann_whitney", "mann_whitney_clustering", "midranks", "pairwise_distances",
]
