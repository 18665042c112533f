"""Network-assisted collective operations on a simulated star of QPUs."""

__version__ = "0.1.0"

from .cost import CostReport, ebit_cost, distributed_mcz_depth, monolithic_mcz_depth, optimal_k
from .network import Network, PartitionPlan, QubitAddress, StarTopology, build_star
from .protocols import (
    cat_disentangler,
    cat_entangler,
    distributed_mcz,
    entanglement_swap,
    lump_execute,
    remote_diagonal,
    remote_two_qubit,
    teleport_state,
)
from .grover import GroverSpec, run_distributed_grover, run_monolithic_grover
