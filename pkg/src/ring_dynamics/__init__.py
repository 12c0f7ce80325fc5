"""Classical dynamics of two super-integrable ring-shaped potentials.

Library layout:
    phase             phase-space primitives, gradients, Poisson brackets
    potentials        the two wells, exact gradients, Hamiltonian
    integrals         the four integrals of motion and involution sets
    oscillator_orbit  closed-form trajectories of the oscillator system
    coulomb_orbit     closed-form trajectories of the Coulomb system
    integrate         leapfrog / RK4 integration, the numerical oracle
    analysis          periodicity, closure, bounds audits, planarity
    cli               simulate / verify / sweep / analyze front end
"""

from . import (analysis, cli, coulomb_orbit, integrals, integrate,
               oscillator_orbit, phase, potentials)
from .analysis import (BoundsViolation, PeriodicityVerdict, PlanarityReport,
                       bounds_audit, classify_periodicity, closure_distance,
                       convergents, m_for_periodicity, planarity)
from .errors import (ConfigError, DomainError, SingularityError,
                     StepLimitError, UnboundedOrbitError)
from .integrals import (CoulombIntegrals, OscillatorIntegrals,
                        coulomb_integrals, independence_rank,
                        involution_residuals, oscillator_integrals)
from .integrate import (IntegratorConfig, Trajectory, drift_report,
                        integrate, interpolate_state, sample_orbit)
from .phase import (PhaseFunction, PhasePoint, Vec3, angular_momentum,
                    numerical_gradient, poisson_bracket)
from .potentials import (CoulombParams, OscillatorParams, grad_v,
                         hamiltonian, v_coulomb, v_oscillator)

__version__ = "0.1.0"
