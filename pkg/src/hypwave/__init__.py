"""Radial linear and focusing nonlinear Schrodinger dynamics on hyperbolic space.

Modules
-------
geometry
    Hyperboloid-model primitives, radial grids and fields, radial operators.
specfun
    Plancherel density, spherical functions, and the derivative-expansion
    coefficient tables with their bound scans.
kernels
    Oscillatory-integral engine and the point dispersion kernel in any
    dimension n >= 2.
transform
    Radial spectral transform pair with Plancherel weights (exactly unitary
    for n = 3).
propagator
    Linear evolution by the spectral route and by the independent
    sphere-averaged kernel route.
estimates
    Dispersive decay fits, weighted Strichartz norms, interpolation
    inequality scans.
nls
    Split-step solver, virial diagnostics, blow-up / global experiments.
profiles
    Named initial-data families.
cli
    Reproducible experiment runner with CSV reports.
"""

__version__ = "0.1.0"
