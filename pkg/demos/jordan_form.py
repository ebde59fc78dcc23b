"""
The system matrix on the transition line
========================================

On Omega = 0 the two characteristic speeds coincide but the matrix is not a
multiple of the identity, so it cannot be diagonalised. It is similar to a
Jordan block instead.
"""

import numpy as np

from mixotype import models
from mixotype.jordan import conjugating_matrix, integrating_factor_residual
from mixotype.syscore import SystemDef, char_speeds
from mixotype import expr as ex

np.set_printoptions(precision=6, suppress=True)

for name, system, point in [("dNLS", models.dnls(), (2.0, 0.0)),
                            ("dB", models.boussinesq(), (0.0, 1.5))]:
    jd = conjugating_matrix(system, point, 1.0, 0.0)
    print(f"{name} at {point}: lambda = {jd.lam}, branch {jd.branch}")
    print(jd.v0)

# A matrix with C != 0 on its line: the conjugating matrix has two free
# parameters, and every choice lands on the same block.
system = SystemDef(*(ex.parse(e) for e in ("2*u", "-1", "u", "0")))
point = (1.0, 0.3)
print("\nV =", system.matrix(point).tolist(), " eigenvector", char_speeds(system, point).eigenvector_on_tl)
for a, b in [(1, 0), (0.5, 2), (-3, 0.25)]:
    jd = conjugating_matrix(system, point, a, b)
    conj = jd.p_matrix @ jd.v0 @ np.linalg.inv(jd.p_matrix)
    print(f"a = {a:5}, b = {b:5}: P V P^-1 =\n{conj}  residual {jd.residual:.1e}")

# Candidate integrating factors are only certified, never constructed.
system = SystemDef(*(ex.parse(e) for e in ("0", "1", "-1", "0")))
for a, b in [("1", "0"), ("1", "u")]:
    print(f"factors a = {a}, b = {b}: residuals {integrating_factor_residual(system, a, b, (0.2, 0.1))}")
