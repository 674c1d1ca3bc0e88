"""
Short-time expansion of a qubit coupled to a qubit environment
==============================================================

The reduced dynamics of a system coupled to a finite environment has a GKS
matrix g(t) = g0 + g1 t + g2 t^2 + O(t^3).  We compare the coefficients with
the exact simulation and recover the time-local generator.
"""

from pathlib import Path

import numpy as np

from cpkit.bases import gellmann_basis
from cpkit.cli import load_model
from cpkit.lindblad import integrate_gks
from cpkit.opensys import expansion, extract_generator, gks_at, verify_expansion

model = load_model(str(Path(__file__).parent.parent / "src" / "cpkit" / "examples" / "demo_model.json"))
f = gellmann_basis(model.n)

exp = expansion(model, f)
np.set_printoptions(precision=3, suppress=True)
print("g1:\n", exp.g1)
print("g2 (entries with a, b >= 1 from the closed form):\n", exp.g2.real)

rep = verify_expansion(model, f, [0.02, 0.01, 0.005])
for s in rep.samples:
    print(f"t={s.t:<6} deviation {s.deviation_submatrix:.2e}  min eig g(t) {s.min_eig_exact:+.1e}")
print(f"log-log exponent {rep.exponent:.3f}")

# The truncated polynomial itself is not PSD: its smallest eigenvalue is O(t^3)
for s in rep.samples:
    print(f"t={s.t:<6} min eig of g0 + g1 t + g2 t^2: {s.min_eig_truncated:+.2e}")

traj = integrate_gks(lambda t: extract_generator(model, f, t), f, 0.2, 20)
print("generator closure error at t=0.2:", np.max(np.abs(traj.final.g - gks_at(model, f, 0.2))))
