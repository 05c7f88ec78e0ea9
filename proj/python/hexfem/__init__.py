"""Matrix-free high-order finite element operators and the BP benchmarks."""

from ._core import (
    Basis,
    Problem,
    __version__,
    basis,
    quadrature,
    run_bench,
    setup,
)

__all__ = [
    "Basis",
    "Problem",
    "__version__",
    "basis",
    "quadrature",
    "run_bench",
    "setup",
]
