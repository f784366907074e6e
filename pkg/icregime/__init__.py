"""
Strong-interference regimes of K-user interference channels: condition sets and
their Gaussian checks, joint-decoding rate regions, and brute-force verification
of the degradedness lemmas on small discrete channels.
"""
from .errors import (ConvergenceError, GridOverflowError, ICRegimeError, ModelValidationError, NumericError,
                     RegimeError, SchemaError, SizeCapError)
from .icregime_types import GridSpec, RunConfig, SampleSpec, VerificationReport
from .model import (DiscreteBroadcastChannel, DiscretePMF, DiscreteTwoOutputChannel, GaussianIC, RateVector,
                    TwoOutputSystem, load_channel_spec, to_standard_form, validate)

__version__ = "0.1.0"
