"""Evolutionary biclustering of trend-preserving submatrices."""
from .core import (
    Bicluster,
    BiclusterSet,
    Chromosome,
    ExpressionMatrix,
    ValidationError,
    bicluster_cells,
    cell_jaccard,
    chromosome_hash,
)
from .evolution import EvolutionParams, RunReport, run
from .trend import TrendParams, evaluate_population, fitness, row_supports, supporting_rows

__all__ = [
    "Bicluster", "BiclusterSet", "Chromosome", "ExpressionMatrix", "ValidationError",
    "bicluster_cells", "cell_jaccard", "chromosome_hash",
    "EvolutionParams", "RunReport", "run",
    "TrendParams", "evaluate_population", "fitness", "row_supports", "supporting_rows",
]
__version__ = "0.1.0"
