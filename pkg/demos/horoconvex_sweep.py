"""Print log lower bounds for horoconvex domains over a small dimension x diameter grid.

The numerical pipeline is compared with the explicit and asymptotic closed
forms; all three are reported as natural logarithms because the values
leave double range quickly.

    python3 demos/horoconvex_sweep.py
"""
from gapforge.moduli import asymptotic_horoconvex_bound, explicit_horoconvex_bound, horoconvex_sweep

dims = [2, 3, 5]
diams = [0.5, 1.0, 2.0, 4.0]
print(f"{'N':>3} {'D_H':>5} {'log bound':>14} {'log explicit':>16} {'log asymptotic':>16}")
for rep in horoconvex_sweep(dims, diams, n=500):
    e = explicit_horoconvex_bound(rep.N, rep.D_H).log
    a = asymptotic_horoconvex_bound(rep.N, rep.D_H).log
    print(f"{rep.N:>3} {rep.D_H:>5.2f} {rep.log_bound:>14.4f} {e:>16.4e} {a:>16.4e}")
