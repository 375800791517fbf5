"""Weyl algebras over finite mode families, their strict deformation
quantization, and the equilibrium states of the free Bose gas on both
sides of the classical limit."""

from . import algebra, berezin, equilibrium, gibbsmc, quantize, spectrum, states, testfn
from .algebra import WeylElement, weyl, multiply, adjoint, poisson_bracket, \
    scaled_commutator, central_state, norm_bounds
from .errors import WeylgasError, ValidationError, CertificateError
from .quantize import quantize as quantize_element, preimage, \
    vonneumann_residual, dirac_residual, nonsurjectivity_witness
from .spectrum import BoxSpectrum, trace_h_power
from .states import StateSpec, weyl_expectation, critical_density, \
    quantum_density, two_point
from .testfn import TestFunction, GaussTerm, gaussian
from .equilibrium import WeakDerivationSpec, solve_mu_quantum, \
    mu_net_classical, kms_residual
from .gibbsmc import GaussianMeasureSpec, characteristic_mc, cylindrical_kms_mc
from .berezin import WavePacket, coherent_state, berezin_matrix_element, \
    schrodinger_matrix_element

__version__ = "0.1.0"
