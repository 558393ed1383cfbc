"""Gaussian input through a Gaussian channel.

Everything here has a closed form, which makes it the natural first check:
Y = X + sqrt(a) W with X, W ~ N(0, 1) is N(0, 1 + a), so

    h(Y)      = log(2 pi e (1 + a)) / 2
    J(Y)      = 1 / (1 + a)
    E[X | y]  = y / (1 + a)

and de Bruijn's identity d/da h(Y) = J(Y) / 2 reads 1 / (2 (1 + a)) on both
sides.  The script computes each quantity by quadrature and compares.
"""

import math

from infolab import AdditiveNoiseChannel, gaussian
from infolab import identities as ids
from infolab import infomeasures as im

g = gaussian()
print(f"{'a':>6} {'h(Y)':>12} {'exact':>12} {'J(Y)':>12} {'exact':>12}")
for a in (0.1, 0.5, 1.0, 4.0):
    ch = AdditiveNoiseChannel(g, g, a)
    h = im.differential_entropy(ch)
    j = im.fisher_location(ch)
    print(f"{a:6g} {h:12.9f} {0.5 * math.log(2 * math.pi * math.e * (1 + a)):12.9f} {j:12.9f} {1 / (1 + a):12.9f}")

ch = AdditiveNoiseChannel(g, g, 1.0)
print("\nposterior mean at a = 1 (should be y / 2):")
for y in (-2.0, 0.5, 3.0):
    print(f"  y = {y:5g}   E[X|y] = {ch.posterior_mean(y):.12f}")

# The entropy derivative is a finite difference in a; the Fisher side is a
# single quadrature at fixed a.  They share nothing but the marginal density.
print()
for a in (0.25, 1.0, 5.0):
    print(ids.verify_de_bruijn(AdditiveNoiseChannel(g, g, a)))

# Second order: d^2 h / da^2 = -E[(S')^2] / 2, which is -1 / (2 (1 + a)^2) here.
rep = ids.verify_cor5(ch)
print(rep)
print(f"closed form: {-1 / 8:.10g}")
