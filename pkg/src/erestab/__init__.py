"""Linear stability of elliptic relative equilibria in the restricted 4-body problem.

The massless fourth body moves in the field of three primaries that form an
Euler collinear central configuration on a Keplerian ellipse.  Subpackages:

``kepler_cc``
    central configuration, massless-body position, Kepler kinematics.
``reduction``
    potential matrix ``D``, spectral gap ``alpha`` and the linearized system.
``monodromy``
    RK4 fundamental solution and period map.
``spectral``
    symplectic normal forms, Krein signs and stability verdicts.
``maslov``
    Galerkin omega-Morse indices, splitting numbers and the Bott identity.
``atlas``
    scans, curve tracing and the ``erestab`` command line.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    EreError,
    InputError,
    DomainError,
    SolverError,
)
from .kepler_cc import (  # noqa: E402
    MassTriple,
    CentralConfiguration,
    KeplerOrbit,
    solve_central_configuration,
    solve_euler_quintic,
    solve_symmetric_y,
)
from .reduction import ReducedParams, build_B, build_D, reduced_params, symmetric_alpha  # noqa: E402
from .monodromy import SymplecticPath, integrate_path, period_map, monodromy_circular  # noqa: E402
from .spectral import NormalForm, Verdict, Region, classify, stability_verdict  # noqa: E402
from .maslov import IndexRecord, morse_index, index_via_splitting, bott_check  # noqa: E402

__all__ = [
    "__version__",
    "EreError",
    "InputError",
    "DomainError",
    "SolverError",
    "MassTriple",
    "CentralConfiguration",
    "KeplerOrbit",
    "solve_central_configuration",
    "solve_euler_quintic",
    "solve_symmetric_y",
    "ReducedParams",
    "build_B",
    "build_D",
    "reduced_params",
    "symmetric_alpha",
    "SymplecticPath",
    "integrate_path",
    "period_map",
    "monodromy_circular",
    "NormalForm",
    "Verdict",
    "Region",
    "classify",
    "stability_verdict",
    "IndexRecord",
    "morse_index",
    "index_via_splitting",
    "bott_check",
]
