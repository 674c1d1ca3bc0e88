"""
Transposition: positive but not completely positive
===================================================

The transpose map sends density matrices to density matrices, yet its Choi
matrix has a negative eigenvalue.  We look at it through every matrix
isomorphism in cpkit and see which of them detect the failure.
"""

import numpy as np

from cpkit.bases import gellmann_basis, standard_basis
from cpkit.channels import check, choi, dpj, fc, gks, pskh, transposition_superop
from cpkit.linalg import herm_eig

np.set_printoptions(precision=3, suppress=True)

phi = transposition_superop(2)
print("superoperator of A -> A^T:\n", phi.matrix.real)

# The Choi matrix is a permutation of the superoperator entries; here it is the same matrix
c = choi(phi).g
print("Choi matrix equals the superoperator:", np.array_equal(c, phi.matrix))
print("Choi eigenvalues:", herm_eig(c).eigenvalues)

# In the Pauli basis the GKS matrix is diagonal
pauli = gellmann_basis(2)
print("GKS matrix, Pauli basis:\n", gks(phi, pauli).g.real)

# The de Pillis-Jamiolkowski matrix is PSD, so it cannot serve as a CP test
print("dPJ eigenvalues:", herm_eig(dpj(phi, pauli)).eigenvalues)

# pskh depends on the basis; fc does not
for name, f in (("standard", standard_basis(2)), ("pauli", pauli)):
    print(f"pskh/{name} eigenvalues:", herm_eig(pskh(phi, f)).eigenvalues)
    print(f"fc/{name} eigenvalues:  ", herm_eig(fc(phi, f)).eigenvalues)

print(check(phi, pauli))
