"""Exception hierarchy shared by all boxsim modules.

Everything derives from BoxsimError so callers (and the CLI) can catch
domain failures without swallowing programming errors.
"""

from __future__ import annotations


class BoxsimError(Exception):
    """Base class for all boxsim domain errors."""


class InvalidBehaviorError(BoxsimError, ValueError):
    """A conditional-probability table violates range or normalization."""


class InvalidMixtureError(BoxsimError, ValueError):
    """Mixture weights are negative, mismatched, or do not sum to one."""


class SignalingBehaviorError(BoxsimError):
    """A one-sided marginal was requested for a signaling behavior."""


class RangeError(BoxsimError, ValueError):
    """A numeric argument lies outside its supported range."""


class GeometryError(BoxsimError):
    """A behavior does not sit where the operation requires (e.g. not on
    a CHSH facet)."""


class StructureError(BoxsimError):
    """Mismatched building blocks: wrong partition, wrong kernel shape,
    incompatible transcript."""


class DegenerateBiasError(BoxsimError, ValueError):
    """The two coin rates coincide; no block length can separate them."""


class ConfigurationError(BoxsimError):
    """A signaling configuration is internally inconsistent (e.g. empty
    decision interval)."""


class InsufficientDataError(BoxsimError):
    """Not enough samples to carry out the requested estimate."""


class FineTunedBehaviorError(BoxsimError):
    """Marginalizing over Bob's output cancelled the memory bias.

    Carries the cancelled pair so callers can inspect how close the two
    marginalized rates are before re-mixing the behavior.
    """

    def __init__(self, alpha_marg: float, beta_marg: float, band: float):
        self.alpha_marg = alpha_marg
        self.beta_marg = beta_marg
        self.band = band
        super().__init__(
            f"marginalized bias pair ({alpha_marg:.6g}, {beta_marg:.6g}) "
            f"is indistinguishable within band {band:.3g}"
        )
