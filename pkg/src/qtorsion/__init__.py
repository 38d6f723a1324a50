"""Analytic torsion on flat model spaces and finite Hodge complexes."""

import os as _os

_threads = _os.environ.get("QTORSION_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"

from .errors import TorsionError, ValidationError  # noqa: E402
from .hodge import FiniteHodgeComplex, MetricFamily, StarOperator  # noqa: E402
from .models import FlatTorusModel  # noqa: E402
from .torsion import TorsionReport  # noqa: E402
from .zeta import ExplicitList, ShiftedLattice, ZetaResult  # noqa: E402

__all__ = [
    "ExplicitList",
    "FiniteHodgeComplex",
    "FlatTorusModel",
    "MetricFamily",
    "ShiftedLattice",
    "StarOperator",
    "TorsionError",
    "TorsionReport",
    "ValidationError",
    "ZetaResult",
    "__version__",
]
