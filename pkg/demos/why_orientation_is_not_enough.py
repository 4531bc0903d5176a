"""Three small maps that each fool one naive test.

fold       the boundary goes once around the target, but the centre is dragged
           outside and one triangle flips.
wrap       every triangle keeps its orientation, yet the boundary winds twice
           around the centre.
overshoot  every triangle keeps its orientation and each boundary edge lies on
           the line of its assigned polygon edge, but one boundary vertex runs
           past the reflex corner and back.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from bijmap.certify import certify_T1, certify_T2, certify_T3, check_necessary
from bijmap.degree import cycle_degree, preimage_count
from bijmap.fixtures import WRAP_QUERY, fold_map, overshoot_map, wrap_map
from bijmap.mesh import boundary_cycle
from bijmap.render import render_svg

OUT = Path(__file__).parent / "out" / "counterexamples"
OUT.mkdir(parents=True, exist_ok=True)


def show(name, certs):
    print(f"{name}:")
    for c in certs:
        first = c.evidence[0] if c.evidence else {}
        print(f"  {c.theorem:9s} {c.verdict:9s} {first}")


phi, poly, A = fold_map()
show("fold", [check_necessary(phi), certify_T1(phi, poly), certify_T2(phi, poly, A)])
(OUT / "fold.svg").write_text(render_svg(phi, poly))

wrap = wrap_map()
cyc = boundary_cycle(wrap.mesh)
print("\nwrap:")
print(f"  orientation check: {check_necessary(wrap).verdict}")
print(f"  at q = {WRAP_QUERY.tolist()}: degree {cycle_degree(wrap, cyc, WRAP_QUERY)}, "
      f"pre-images {preimage_count(wrap, WRAP_QUERY).count}")
q = 0.3 * np.array([np.cos(np.pi / 5), np.sin(np.pi / 5)])
print(f"  at q = {np.round(q, 3).tolist()}: degree {cycle_degree(wrap, cyc, q)}, "
      f"pre-images {preimage_count(wrap, q).count}")
(OUT / "wrap.svg").write_text(render_svg(wrap))

phi, poly, A = overshoot_map()
show("\novershoot", [certify_T2(phi, poly, A), certify_T1(phi, poly), certify_T3(phi, poly, A)])
(OUT / "overshoot.svg").write_text(render_svg(phi, poly))
print(f"\ndrawings in {OUT}")
