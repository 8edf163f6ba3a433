"""
Pauli algebra and Heisenberg propagation
========================================

Pauli strings, the 24 single-qubit Cliffords, and exact noisy expectations of
Clifford circuits computed without a density matrix.
"""

import numpy as np

from qem_ics.circuits import Circuit, frame_from_gates
from qem_ics.density import expectation, run
from qem_ics.noise import NoiseModel
from qem_ics.pauli import C1_H, CNOT, CZ, PauliString, conjugate, multiply
from qem_ics.stabilizer import effective_observable, ideal_expectation, noisy_expectation, propagate_error

# Products keep track of the phase: X Y = i Z
x, y = PauliString.from_str("X"), PauliString.from_str("Y")
print("X * Y =", multiply(x, y))

# A CNOT maps X on the control to X X
print("CNOT: XI ->", conjugate(CNOT(0, 1), PauliString.from_str("XI")))

# A frame fixes the two-qubit gates and the observable; slots hold single-qubit gates
frame = frame_from_gates(2, [CZ(0, 1), CNOT(1, 0)], "ZI")
print("slots:", frame.n_slots, "two-qubit gates:", frame.two_qubit_count)

# Bind Cliffords by index (0 is the identity) and read off U^dag Q U.
# An X factor in U^dag Q U gives f_C = 0: this binding is not error sensitive.
c = Circuit(frame, (C1_H, 0, 0, 0, 0, 0))
print("effective observable:", effective_observable(c), " f_C =", ideal_expectation(c))

# Push an X X error inserted after the first gate to the end of the circuit
print("propagated error:", propagate_error(c, 3, PauliString.from_str("XX")))

# Exact Pauli-noise expectation agrees with the density-matrix simulator
model = NoiseModel.gate_depolarising(0.01)
c = Circuit(frame, (0,) * frame.n_slots)
print("stabilizer:", noisy_expectation(c, model))
print("density   :", expectation(run(c, model), c.observable))
# each gate scales a non-identity Pauli by 1 - 16 eps / 15
print("closed form:", (1 - 16 / 15 * 0.01) ** 2)
assert np.isclose(noisy_expectation(c, model), expectation(run(c, model), c.observable))
