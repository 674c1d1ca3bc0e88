"""
Generators, Lindblad form, and the GKS equation
===============================================

A dephasing generator for a qubit is converted between its GKS matrix and its
Lindblad form, then integrated directly on GKS matrices and compared with the
matrix exponential.
"""

import numpy as np

from cpkit.bases import gellmann_basis
from cpkit.channels import SuperOp, gks
from cpkit.linalg import mat_exp
from cpkit.lindblad import LindbladForm, generator_to_lindblad, integrate_gks, lindblad_to_generator

sz = np.diag([1.0, -1.0])
sx = np.array([[0.0, 1.0], [1.0, 0.0]])
f = gellmann_basis(2)

l = LindbladForm.with_completion(0.4 * sx, [0.7], [sz / np.sqrt(2)])
k = lindblad_to_generator(l, f)
np.set_printoptions(precision=3, suppress=True)
print("generator matrix k:\n", k.k)

back = generator_to_lindblad(k)
print("recovered rates:", back.rates)
print("recovered Hamiltonian:\n", back.hamiltonian)

exact = gks(SuperOp(mat_exp(0.5 * k.superop().matrix)), f).g
for steps in (4, 8, 16, 1000):
    traj = integrate_gks(lambda t: k, f, 0.5, steps)
    print(f"{steps:5d} RK4 steps: error {np.max(np.abs(traj.final.g - exact)):.2e}")
