"""
Kraus operators from any orthonormal basis
==========================================

A random channel is written down in three bases.  The GKS matrices differ,
but their spectra agree, and diagonalising any of them yields an orthogonal
Kraus decomposition.
"""

import numpy as np

from cpkit.bases import gellmann_basis, rotated_basis, standard_basis
from cpkit.channels import check, gks, kraus_from_gks, superop_from_kraus
from cpkit.linalg import herm_eig

rng = np.random.default_rng(1)
n = 3

ops = [rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(5)]
s = superop_from_kraus(ops)

q, _ = np.linalg.qr(rng.normal(size=(n * n, n * n)) + 1j * rng.normal(size=(n * n, n * n)))
bases = {
    "standard": standard_basis(n),
    "gellmann": gellmann_basis(n),
    "rotated": rotated_basis(gellmann_basis(n), q),
}

for name, f in bases.items():
    g = gks(s, f)
    k = kraus_from_gks(g)
    err = np.max(np.abs(superop_from_kraus(k).matrix - s.matrix))
    print(f"{name:9s} eigenvalues {np.round(herm_eig(g.g).eigenvalues[:5], 4)}  "
          f"{len(k)} Kraus ops, reassembly error {err:.1e}")

print(check(s))
