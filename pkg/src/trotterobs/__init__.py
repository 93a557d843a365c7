"""Observable-aware Trotter error analysis and evolution-order optimization."""

from .anneal import AnnealSchedule, AnnealTrace, optimize_order, swap_neighbor
from .bounds import (
    BoundReport,
    ErrorKernel,
    Family,
    ObservationCost,
    TrotterCapExceeded,
    commutator_bound,
    lloyd_bound,
    observation_cost,
    random_input_bound,
    trotter_number_search,
)
from .hamiltonian import HamiltonianModel, ParseError, load_hamiltonian, parse_hamiltonian
from .pauli import PauliString, PauliSum
from .product_formula import FormulaSpec

__all__ = [
    "AnnealSchedule",
    "AnnealTrace",
    "BoundReport",
    "ErrorKernel",
    "Family",
    "FormulaSpec",
    "HamiltonianModel",
    "ObservationCost",
    "ParseError",
    "PauliString",
    "PauliSum",
    "TrotterCapExceeded",
    "commutator_bound",
    "load_hamiltonian",
    "lloyd_bound",
    "observation_cost",
    "optimize_order",
    "parse_hamiltonian",
    "random_input_bound",
    "swap_neighbor",
    "trotter_number_search",
]
