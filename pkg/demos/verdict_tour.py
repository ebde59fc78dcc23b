"""
Characteristics meeting the transition line
===========================================

Where a characteristic touches Omega = 0, its slope against the line's slope
decides whether a solution can pass from the hyperbolic to the elliptic side.
"""

from mixotype import models
from mixotype.charflow import Bounds, contact_exponent, crossing_verdict, trace_simple_wave

cases = [
    ("dispersionless Boussinesq", models.boussinesq(), (0.0, 0.0)),
    ("dispersionless NLS", models.dnls(), (1.0, 0.0)),
    ("u_t = v_x, v_t = v^(1/3) u_x", models.power_wave("1/3"), (0.0, 0.0)),
    ("u_t = v_x, v_t = v^3 u_x", models.power_wave(3), (10.0, 0.0)),
    ("h = u^4/12 - u^2 v/2 + v^2/2", models.from_hamiltonian("u^4/12 - u^2*v/2 + v^2/2"), (0.0, 0.0)),
    ("h = u^5/20 - u^2 v/2 + v^2/2", models.from_hamiltonian("u^5/20 - u^2*v/2 + v^2/2"), (0.0, 0.0)),
]

for label, system, contact in cases:
    v = crossing_verdict(system, contact)
    print(f"{label:32s} {v.kind:24s} {v.diagnostics}")

# dNLS: the line v = 0 is itself a characteristic, and waves run into it
# rather than across. r+ = u + 2 sqrt(v) stays fixed on the way down.
wave = trace_simple_wave(models.dnls(), (0.0, 1.0), "plus", Bounds(-3, 3, -1, 3), 0.01)
print(f"\ndNLS wave from (0, 1) ends at ({wave.end[0]:.6f}, {wave.end[1]:.6f}) ({wave.termination})")

# Near a contact, v - v0 grows like (u - u0)^(m/2), m the order of the first
# non-vanishing pure-u derivative of the density.
for h in ("v^2/2 + u^3/6", "v^2/2 + u^4/24", "v^2/2 + u^5/120"):
    slope, r2 = contact_exponent(models.from_hamiltonian(h), (0.0, 1.0))
    print(f"{h:18s} contact exponent {slope:.4f}  (r^2 {r2:.6f})")
