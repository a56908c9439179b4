"""
Closed-form decay rates and the phase transition
================================================

Independent services give the bottleneck rate.  When both stations share
one service time per customer, the rate is capped at half the MGF radius
and the regime switches as the load crosses one half.
"""

import math

from msnet import (Exponential, Uniform, queue_exponent, rate_via_rate_function,
                   single_server_rate, tandem_rate_case1, tandem_rate_case2)

print(single_server_rate(Exponential(2.0), Exponential(1.0)).to_json())
print(single_server_rate(Uniform(0.2, 1.0), Exponential(1.0)).to_json())
print(tandem_rate_case1(Exponential(2.0), Exponential(3.0), Exponential(1.0)).to_json())

print("\nlambda  theta*  regime")
for i in range(1, 10):
    lam = i / 10
    r = tandem_rate_case2(Exponential(1.0), Exponential(lam))
    print(f"{lam:.1f}     {r.theta_star:.3f}   {r.regime}")

# the same numbers from the rate function of the exponent, by grid Legendre transform
s, a = Exponential(1.0), Exponential(0.3)
f = lambda t: (s.log_mgf(t) if t < 0.5 else math.inf) + a.log_mgf(-t)
print("\nvia rate function, lambda=0.3:", round(rate_via_rate_function(f, 0.99), 5))
g = queue_exponent(Exponential(2.0), Exponential(1.0))
print("via rate function, M/M/1:", round(rate_via_rate_function(g, 1.999), 5))
