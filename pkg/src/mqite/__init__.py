"""Measurement-based quantum imaginary-time evolution on a dense statevector simulator."""

__version__ = "0.1.0"

from .pauli import Hamiltonian, PauliString, parse_hamiltonian, parse_pauli
from .simulator import Circuit, Prep
from .evolution import MQITEConfig, RunRecord, run_mqite
from .ite import exact_ground, run_ite
