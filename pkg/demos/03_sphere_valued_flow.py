"""Sphere-valued critical points of the order-s energy: projected gradient
flow, its penalized relaxation, and the pointwise optimality residual."""

import numpy as np

import fracsys as fs


def unit_phase_data(amplitude=0.6):
    def g(pts):
        th = amplitude * np.tanh(pts[:, 0])
        return np.stack([np.cos(th), np.sin(th)], axis=-1)

    return fs.callback_rule(g)


grid = fs.GridSpec(dim=1, h=1 / 128, radius=1.0)
g = unit_phase_data()

print("== projected gradient flow, s = 1/2, m = 2 ==")
u, rep = fs.gradient_flow_s_harmonic(grid, g, 0.5, m=2, steps=20000, tol=1e-7)
trace = np.array(rep.energy_trace)
print(f"converged in {rep.iterations} steps; tangential residual {rep.final_residual:.2e}")
print(f"max | |u| - 1 | = {rep.constraint_violation:.1e} (projection is nodewise exact)")
print(f"energy {trace[0]:.6f} -> {trace[-1]:.6f}, "
      f"monotone: {bool(np.all(np.diff(trace) <= 1e-10 * trace[0]))}")

resid = fs.euler_lagrange_residual(u, 0.5)
mask = grid.interior_mask()
print(f"pointwise optimality |(-D)^s u - u B(u,u)|: "
      f"max {np.max(np.asarray(resid.values)[mask]):.2e}")

print("\n== penalized relaxation at decreasing penalty ==")
for eps in (4e-3, 1e-3):
    cfg = fs.GLConfig(epsilon=eps, s=0.5, max_steps=40000, tol=1e-7)
    v, vrep = fs.ginzburg_landau_solve(cfg, g, grid, m=2)
    sel = np.abs(grid.axis()) <= 0.5
    gap = np.max(np.abs(np.asarray(v.values)[sel] - np.asarray(u.values)[sel]))
    print(f"  eps={eps:g}: max | |v| - 1 | = {vrep.constraint_violation:.2e}, "
          f"distance to the constrained solution on the half ball {gap:.2e}")
print("as the penalty sharpens the relaxed solution approaches the")
print("sphere-valued one; the modulus defect shrinks with eps.")
