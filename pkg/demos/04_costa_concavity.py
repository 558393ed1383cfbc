"""Concavity of the entropy power along a Gaussian perturbation.

N(X + sqrt(a) W) is concave in a when W is Gaussian, and exactly linear
(equal to Var(X) + a) when X is Gaussian too.  The script prints the
second differences on a grid for three inputs.
"""

import numpy as np

from infolab import bounds as bd
from infolab import gaussian, student_t, truncated_gaussian

grid = np.linspace(0.1, 1.0, 10)
for label, prior in (("gaussian", gaussian()), ("student-t(3)", student_t(3)),
                     ("truncated gaussian", truncated_gaussian())):
    rep = bd.costa_epi_check(prior, a_grid=grid)
    print(f"{label}: concave={rep.concave}, chord inequality={rep.chord_ok}")
    print("  N(a)       :", " ".join(f"{v:.5f}" for v in rep.entropy_powers))
    print("  second diff:", " ".join(f"{v:.1e}" for v in rep.second_diffs))
