"""Entropy derivatives when the noise is exponential or gamma.

For one-sided noise the Fisher information of Y no longer gives d/da h(Y);
the general first-derivative identity uses the posterior mean slope instead,
and the exponential and gamma cases reduce it to posterior averages.  The
priors must be nonnegative with a moment generating function, so a
Student-t prior is rejected while gamma priors are fine.
"""

from infolab import AdditiveNoiseChannel, exponential_unit, gamma_dist, student_t
from infolab import identities as ids
from infolab.errors import AssumptionViolated

prior = gamma_dist(2.0)

print("exponential noise")
for a in (0.5, 1.0, 2.0):
    ch = AdditiveNoiseChannel(prior, exponential_unit(), a)
    print(" ", ids.verify_thm6(ch))
    print(" ", ids.verify_cor2_exponential(ch))

print("\ngamma(2) noise, with the companion channel of shape 1")
ch = AdditiveNoiseChannel(gamma_dist(3.0), gamma_dist(2.0), 1.0)
print(" ", ids.verify_cor3_gamma(ch))

print("\nsecond derivatives")
print(" ", ids.verify_cor6_exponential(AdditiveNoiseChannel(prior, exponential_unit(), 1.0)))
print(" ", ids.verify_cor7_gamma(AdditiveNoiseChannel(prior, gamma_dist(3.0), 1.0)))

print("\na heavy-tailed prior is outside the setting:")
try:
    ids.verify_cor2_exponential(AdditiveNoiseChannel(student_t(3), exponential_unit(), 1.0))
except AssumptionViolated as exc:
    print("  refused:", ", ".join(exc.failed))
