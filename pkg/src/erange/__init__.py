"""Low-energy scattering observables for short-range central potentials."""
from __future__ import annotations

from ._accel import backend
from .errors import (ConfigError, ConsistencyError, DomainError, ErangeError, IndeterminateError,
                     InputError, IterationError, NumericError, PreconditionError, ResonanceError)
from .grid import RadialGrid, make_grid
from .observables import (Divergent, EffectiveRangeResult, PhaseShiftCurve, b_coefficient,
                          barred_coefficients, direct_effective_range, effective_range,
                          levinson, low_k_expansion, phase_shift_curve, phase_shift_integral,
                          phase_shift_matching, scattering_length, subtracted_phase,
                          zero_energy_expansion)
from .potential import (ExponentialTail, PowerTail, SquareBarrier, SquareWell, Tabulated,
                        TruncatedAt, builtin_catalog, from_dict, integrability_class,
                        predict_finiteness, to_dict)
from .radial import (BoundStateSpectrum, RadialSolution, bound_states, count_nodes,
                     solve_regular, solve_zero_bounded, solve_zero_regular_volterra, wronskian)
from .scans import ConvergenceScan, theorem_matrix, truncation_scan

__version__ = "0.1.0"

__all__ = [
    "backend", "ConfigError", "ConsistencyError", "DomainError", "ErangeError",
    "IndeterminateError", "InputError", "IterationError", "NumericError", "PreconditionError",
    "ResonanceError", "RadialGrid", "make_grid", "Divergent", "EffectiveRangeResult",
    "PhaseShiftCurve", "b_coefficient", "barred_coefficients", "direct_effective_range",
    "effective_range", "levinson", "low_k_expansion", "phase_shift_curve",
    "phase_shift_integral", "phase_shift_matching", "scattering_length", "subtracted_phase",
    "zero_energy_expansion", "ExponentialTail", "PowerTail", "SquareBarrier", "SquareWell",
    "Tabulated", "TruncatedAt", "builtin_catalog", "from_dict", "integrability_class",
    "predict_finiteness", "to_dict", "BoundStateSpectrum", "RadialSolution", "bound_states",
    "count_nodes", "solve_regular", "solve_zero_bounded", "solve_zero_regular_volterra",
    "wronskian", "ConvergenceScan", "theorem_matrix", "truncation_scan",
]
