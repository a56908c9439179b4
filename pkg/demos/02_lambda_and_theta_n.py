"""
Finite-n log-MGF and its root
=============================

``Lambda_n(theta) = (1/n) log E[exp(theta Z_[1,n](N0))]`` by Monte Carlo,
compared with the exact value for exponential services, then the roots
``theta_n`` and their extrapolation towards the decay rate.
"""

import numpy as np

from msnet import Exponential, MarkLaw, TandemModel, lambda_zn, theta_n, theta_star

model = TandemModel(2)
marks = MarkLaw.independent(Exponential(2.0), Exponential(3.0))
arrival = Exponential(1.0)

for n in (1, 4, 16):
    for theta in (0.25, 0.5, 0.9):
        est = lambda_zn(model, marks, n, theta, replicas=50_000, rng=n)
        flag = " (divergent)" if est.divergent else ""
        print(f"n={n:3d} theta={theta:.2f}  Lambda={est.value:.4f} +- {est.stderr:.4f}  "
              f"ess={est.ess:9.1f}{flag}")

# one customer: Z = s1 + s2, so the log-MGF is known in closed form
theta = 0.5
print("n=1 exact at 0.5:", np.log(2 / 1.5 * 3 / 2.5))

# theta_n solves Lambda_n(theta) + Lambda_T(-theta) = 0 and grows with n
for n in (2, 4, 8):
    r = theta_n(model, marks, arrival, n, replicas=100_000, rng=10 + n)
    print(f"theta_{n} in [{r.bracket[0]:.4f}, {r.bracket[1]:.4f}]")

r = theta_star(model, marks, arrival, (1, 2, 4, 8, 16, 32), replicas=200_000, rng=7)
print(f"theta* ~ {r.theta:.4f}, bracket [{r.bracket[0]:.4f}, {r.bracket[1]:.4f}], "
      f"last usable window n={r.n_used}")
