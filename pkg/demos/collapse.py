"""Collapsing rectangles in the Poincare disk.

With the hyperbolic weight the gap of [-L, L] x [-r, r] shrinks as r goes
to zero; with the flat weight it stays at 3 pi^2 / (4 L^2).

    python3 demos/collapse.py
"""
from gapforge.eigsolve import appendix_collapse

L = 0.8
rows = appendix_collapse(L, (0.2, 0.1, 0.05, 0.025))
print(f"{'r':>6} {'log gap (hyperbolic)':>22} {'gap (flat)':>12} {'height ratio':>13}")
for r in rows:
    print(f"{r.r:>6.3f} {r.log_gap:>22.4f} {r.control_gap:>12.4f} {r.heights['ratio']:>13.6f}")
print(f"ratio limit (16 - L^2)/(16 - 4L^2) = {(16 - L * L) / (16 - 4 * L * L):.6f}")
