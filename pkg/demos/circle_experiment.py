"""
When can a circle of data cross into the elliptic domain?
=========================================================

Dispersionless Boussinesq, u_t = v_x, v_t = u u_x, is hyperbolic for u > 0 and
elliptic for u < 0. Start from a circle of radius 1 centred at (c, 0) in the
(u, v) plane and let it evolve.
"""

import os

import numpy as np

from mixotype import models
from mixotype.evolve import circle_init, critical_c, evolve, tangent_simple_waves
from mixotype.svgplot import Plot

out = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(out, exist_ok=True)
db = models.boussinesq()

# Two simple waves +-v + (2/3) u^(3/2) = k touch the circle from below.
# Riemann invariants keep the image above both, so if they meet at u > 0
# the data can never reach u = 0.
cc = critical_c()
print(f"critical c: {cc:.6f}")

for c in (3.0, 1.4):
    (k, vc), _ = tangent_simple_waves(c)
    meet = (1.5 * k) ** (2 / 3) if k > 0 else None
    print(f"\nc = {c}: tangent waves k = {k:.5f}, touching at v = +-{abs(vc):.5f}")
    print("  waves meet at " + (f"u = {meet:.5f}" if meet else "no point with u >= 0"))

    traj = evolve(db, circle_init(c), 2.0, n_out=8)
    low = min(s.u.min() for s in traj.states)
    print(f"  min u over the run: {low:.5f}")
    print("  crossing: " + ("none" if traj.crossing is None else
                            f"t = {traj.crossing[0]:.4f} at x = {traj.crossing[1]:.4f}"))

    # the (u, v) image at a few times, with the line and the bounding waves
    plot = Plot(f"circle, c = {c}", "u", "v")
    for s in traj.states[::2]:
        plot.line(np.append(s.u, s.u[0]), np.append(s.v, s.v[0]), label=f"t = {s.t:.2f}")
    plot.line([0, 0], [-2.5, 2.5], label="u = 0", color="black", dash="4 3")
    uu = np.linspace(0, c + 1.2, 200)
    wave = k - (2 / 3) * uu ** 1.5
    plot.line(uu, wave, label="tangent waves", color="#555555", dash="2 2")
    plot.line(uu, -wave, color="#555555", dash="2 2")
    plot.save(os.path.join(out, f"circle_c{c:g}.svg"))

# The bound is sufficient, not sharp: below the critical value the data may
# still stay hyperbolic up to t = 2, but nothing guarantees it.
for c in np.linspace(1.6, 1.9, 7):
    traj = evolve(db, circle_init(c, 256), 2.0, n_out=4)
    side = "above" if c > cc else "below"
    print(f"c = {c:.3f} ({side} critical): crossing = {traj.crossing is not None}")
