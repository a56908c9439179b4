"""
Max-plus recursion for a tandem
===============================

Departure epochs of a two-station tandem, the maximal dater of a finite
path, and a look at the structural properties the model satisfies.
"""

import numpy as np

from msnet import (Exponential, MarkLaw, TandemModel, backward_profile, last_activity,
                   maximal_dater, sample_path)

model = TandemModel(2)
marks = MarkLaw.independent(Exponential(2.0), Exponential(3.0))

# customers 0..9 with unit-rate Poisson arrivals, seeded
path = sample_path(model, Exponential(1.0), marks, (0, 9), 42)
print("arrivals       ", np.round(path.arrivals, 3))
print("departures     ", np.round(model.departure_times(path.arrivals, path.marks)[:, -1], 3))
print("X[0,9]          =", round(last_activity(model, path), 4))
print("Z[0,9]          =", round(maximal_dater(model, path), 4))

# the backward profile gives Z[9-k,9] for k = 0..9 in one sweep
print("Z[9-k,9], k=0..9", np.round(backward_profile(model, path), 3))

# delaying the arrival epochs never makes the last departure earlier
delayed = type(path)(path.m, path.arrivals + np.linspace(0, 1, path.arrivals.size), path.marks)
print("monotone in arrivals:", last_activity(model, delayed) >= last_activity(model, path))

# shifting every arrival by c shifts X by c
c = 2.5
moved = path.shifted(c)
print("X shifts by c:", np.isclose(last_activity(model, moved), last_activity(model, path) + c))
