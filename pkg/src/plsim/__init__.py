"""plsim: spectral simulation and verification toolkit for driven-damped
Gross-Pitaevskii condensate models on a periodic box.

Subpackages cover the spatial spectral lattice (:mod:`plsim.grid`), the two
model right-hand sides and their closed-form oracles (:mod:`plsim.models`),
Strang-splitting time integrators (:mod:`plsim.integrators`), fixed-point
iteration on the integral formulation (:mod:`plsim.picard`), space-time
restricted norms and constrained trilinear sums (:mod:`plsim.spacetime`),
a-priori bound verification (:mod:`plsim.checks`), and the command-line
runner (:mod:`plsim.cli`).
"""

__version__ = "0.1.0"
