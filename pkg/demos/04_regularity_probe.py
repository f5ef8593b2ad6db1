"""Probing interior regularity numerically: oscillation-decay ledgers and the
fitted Holder exponent, the one-step contraction of the image ball, Harnack
ratios of verified supersolutions, and the structural audit."""

import numpy as np

import fracsys as fs


def unit_phase_data(amplitude=0.6):
    def g(pts):
        th = amplitude * np.tanh(pts[:, 0])
        return np.stack([np.cos(th), np.sin(th)], axis=-1)

    return fs.callback_rule(g)


print("== dyadic oscillation decay ==")
grid = fs.GridSpec(dim=1, h=1 / 512, radius=1.5)
profiles = {
    "linear (Lipschitz)": (lambda p: p[:, 0], fs.callback_rule(lambda p: p[:, :1])),
    "|x|^(1/2) cusp": (lambda p: np.sqrt(np.abs(p[:, 0])),
                       fs.callback_rule(lambda p: np.sqrt(np.abs(p[:, :1])))),
    "step function": (lambda p: np.sign(p[:, 0]), fs.sign_rule()),
}
bounds = fs.GrowthBounds(a=1.0, b=0.0, a_star=0.0, b_star=0.0, M=2.0)
for name, (fn, rule) in profiles.items():
    f = fs.field_from_function(grid, fn, rule, m=1)
    led = fs.dyadic_ledger(f, [0.0], 5, bounds, s=0.5)
    print(f"  {name:20s}: M_k = {np.round(led.radii, 4)}, "
          f"fitted exponent alpha = {led.alpha_fit:.3f}")
print("geometric decay of the enclosing radii is Holder continuity; the step")
print("function shows none, which is exactly the borderline case below.")

print("\n== structural audit ==")
for a, a_star, M in ((1.0, 0.0, 1.0), (0.9, 0.81, 0.9), (1.0, 1.0, 1.0)):
    out = fs.structural_audit(fs.GrowthBounds(a, 0.0, a_star, 0.0, M))
    print(f"  a={a}, a*={a_star}, M={M}: structural = {out['structural']:.2f}, "
          f"satisfied = {out['satisfied']}")

print("\n== contraction of the image ball ==")
fgrid = fs.GridSpec(dim=1, h=1 / 128, radius=1.0)
u, _ = fs.gradient_flow_s_harmonic(fgrid, unit_phase_data(), 0.5, m=2,
                                   steps=20000, tol=1e-7)
scaled = fs.restrict_rescale(u, 0.9, 1.0)
ceiling = fs.GrowthBounds(a=1.0, b=0.0, a_star=0.81, b_star=0.0, M=1.0)
step = fs.contraction_step(scaled, ceiling, (np.zeros(1), 0.5))
print(f"  sphere-valued solution scaled to 0.9: delta_observed = "
      f"{step['delta_observed']:.3f} (image strictly shrinks)")
for l in (0.5, 0.7, 0.9):
    fill = fs.restrict_rescale(u, 0.5 * (1 + l), 1.0)
    b = fs.GrowthBounds(a=1.0, b=0.0, a_star=max(0.0, 2 * l - 1), b_star=0.0, M=1.0)
    d = fs.contraction_step(fill, b, (np.zeros(1), 0.5))["delta_observed"]
    print(f"  fuller field (l = {l}): delta_observed = {d:.3f}")
print("the closer the solution sits to its ceiling, the weaker the certified")
print("contraction: the geometric mechanism behind the structural condition.")

print("\n== Harnack ratios, uniform in the order ==")
hgrid = fs.GridSpec(dim=1, h=1 / 128, radius=2.0)
builder = fs.supersolution_family(hgrid, unit_phase_data(), m=2)
rep = fs.harnack_sweep(builder, (0.5, 0.7, 0.9, 0.95), (np.zeros(1), 1.0))
for s, r in zip(rep.s_values, rep.ratios_by_s):
    print(f"  s={s}: sup/inf over the unit ball = {r:.4f}")
