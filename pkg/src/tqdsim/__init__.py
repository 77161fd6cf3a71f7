"""Transitionless quantum driving simulator.

Submodules
----------
quantum_core
    Pauli algebra, Hermitian eigensolver, matrix exponential, gauge fixing.
tqd_engine
    Counter-diabatic and generalized transitionless Hamiltonians from a tracked eigenbasis.
models
    Single spin in a rotating field and the controlled single-qubit gate family.
dynamics
    Unitary and Lindblad propagation, relative-purity fidelity.
pulse_compiler
    Pulse programs for the Z-gate protocols and their energy ledger.
experiments, cli
    Experiment runners and the ``tqdsim`` command line.
"""

__version__ = "0.1.0"
