"""An L of three unit squares mapped onto a thinner L, for a few distortion bounds.

A smaller K forces the triangles to stay closer to similarities, which costs
energy.  Every result is checked with the sliding-boundary certificate.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from bijmap.certify import certify_T2
from bijmap.fixtures import lshape
from bijmap.maps import condition_numbers, dirichlet_energy
from bijmap.optimize import BDParams, energy_phase, feasibility_phase
from bijmap.render import render_svg

OUT = Path(__file__).parent / "out" / "lshape"
OUT.mkdir(parents=True, exist_ok=True)

P = lshape(6)
print(f"{P.mesh.n_faces} triangles, target polygon with {P.polygon.n_edges} edges")
print(f"{'K':>5} {'t':>8} {'energy':>8} {'max cond':>9}  T2")
for K in (15.0, 2.5, 2.0, 1.6):
    params = BDParams(K=K)
    feas = feasibility_phase(P.mesh, P.polygon, P.assignment, params)
    if feas.status != "feasible":
        print(f"{K:5g}  no strictly feasible map (best t = {min(feas.values):.3g})")
        continue
    tr = energy_phase(P.mesh, P.polygon, P.assignment, params, feas.final_map)
    phi = tr.final_map
    cert = certify_T2(phi, P.polygon, P.assignment)
    print(f"{K:5g} {feas.values[-1]:8.3f} {dirichlet_energy(phi):8.4f} "
          f"{np.max(condition_numbers(phi)):9.3f}  {cert.verdict}")
    (OUT / f"K{K:g}.svg").write_text(render_svg(phi, P.polygon, "gradient_norm"))
print(f"drawings in {OUT}")
