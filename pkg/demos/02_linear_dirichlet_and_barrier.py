"""Linear nonlocal Dirichlet problems: exact profile, maximum principle,
and the barrier that absorbs inhomogeneous terms in the contraction step."""

import numpy as np

import fracsys as fs

# --- the classic explicit solution -------------------------------------------

print("== known profile: rhs = 1 on (-1, 1), s = 1/2 ==")
grid = fs.GridSpec(dim=1, h=1 / 512, radius=1.0)
problem = fs.LinearProblem(fs.make_fractional_kernel(1, 0.5), grid, 1.0, fs.zero_rule())
v, rep = fs.solve_linear_dirichlet(problem)
x = grid.axis()
sel = np.abs(x) <= 0.8
ratio = np.asarray(v.values)[sel, 0] / np.sqrt(1 - x[sel] ** 2)
print(f"v(x) / (1-x^2)^(1/2) over |x|<=0.8: mean {np.mean(ratio):.6f}, "
      f"spread {np.std(ratio)/np.mean(ratio):.2e}")
print(f"solver residual {rep.final_residual:.1e}, "
      f"truncation estimate {rep.truncation_estimate:.1e}")

# --- maximum principle ---------------------------------------------------------

print("\n== maximum principle ==")
neg = fs.LinearProblem(fs.make_fractional_kernel(1, 0.5), grid, -1.0, fs.zero_rule())
w, _ = fs.solve_linear_dirichlet(neg)
print(f"rhs = -1, zero outside: max v = {np.max(np.asarray(w.values)):.2e} "
      f"(nonpositive, as the discrete M-matrix structure forces)")

# --- the barrier and its sup bound ---------------------------------------------

print("\n== barrier -Lv = -1 in the 2-ball, v = 0 outside ==")
bgrid = fs.GridSpec(dim=1, h=1 / 128, radius=2.0)
for s in (0.5, 0.7, 0.9):
    out = fs.barrier_bound(bgrid, fs.make_fractional_kernel(1, s))
    print(f"  s={s}: sup |v| on the half ball = {out['L_bound']:.4f}, "
          f"shift constant tau = {out['tau']:.4f}")
print("the sup bound stays within a factor 2 across the sweep: the constants")
print("of the contraction machinery are uniform in the order.")
