"""Tail asymptotics of the stationary maximal dater in monotone-separable networks."""

from .analytic import (AnalyticRate, queue_exponent, rate_for, rate_via_rate_function,
                       single_server_rate, tandem_rate_case1, tandem_rate_case2)
from .dist import (Deterministic, DistributionSpec, Empirical, Exponential, Gamma, MarkLaw,
                   Uniform, from_dict)
from .errors import (BatchTooSmall, DegenerateInput, HorizonExceeded, InsufficientTail,
                     MissingArtifacts, MsnetError, NoSignChange, Unstable, UnstableInput,
                     ValidationError)
from .estimate import (LambdaEstimate, ThetaResult, gamma_estimate, lambda_zn, saturated_daters,
                       theta_n, theta_star)
from .net import (NetworkModel, SamplePath, SingleServerModel, TandemModel, backward_profile,
                  last_activity, maximal_dater, maximal_dater_saturated, sample_path,
                  stationary_dater_truncated)
from .streams import Stream
from .tailsim import (SlopeFit, TailSample, ccdf_curve, fit_tail_slope, lower_bound_dater,
                      sample_stationary_daters, sandwich, upper_bound_dater)

__version__ = "0.1.0"
