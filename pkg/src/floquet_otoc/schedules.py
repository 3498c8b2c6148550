"""Per-kick field amplitudes for the constant, linear, and periodic protocols.

The n-th kick acts at t = n*tau (first kick n=1); its transverse angle uses
the field evaluated at that instant, while the longitudinal angle integrates
the longitudinal field over the following inter-kick window.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class ProtocolTag(enum.Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class QuenchProtocol:
    """Time dependence of the drive fields.

    Linear: h_z(t) = h_z0 + gamma*t, h_x(t) = h_x0. Constant is Linear with
    gamma = 0. Periodic: h_z(t) = h_z0*cos(alpha*t), h_x(t) = h_x0*sin(alpha*t),
    with alpha = pi/(2*t_max) under the default constructor.
    """

    tag: ProtocolTag
    h_x0: float
    h_z0: float
    gamma: float = 0.0
    alpha: float | None = None
    t_max: float | None = None

    def __post_init__(self) -> None:
        if self.tag is ProtocolTag.PERIODIC:
            if self.t_max is None or self.t_max <= 0:
                raise ValueError("periodic protocol requires t_max > 0")
            if self.alpha is None:
                object.__setattr__(self, "alpha", math.pi / (2.0 * self.t_max))
            if self.alpha <= 0:
                raise ValueError("periodic protocol requires alpha > 0")
        elif self.gamma < 0:
            raise ValueError("gamma must be >= 0")

    @staticmethod
    def constant(h_x0: float, h_z0: float) -> "QuenchProtocol":
        return QuenchProtocol(ProtocolTag.CONSTANT, h_x0, h_z0, gamma=0.0)

    @staticmethod
    def linear(h_x0: float, h_z0: float, gamma: float) -> "QuenchProtocol":
        return QuenchProtocol(ProtocolTag.LINEAR, h_x0, h_z0, gamma=gamma)

    @staticmethod
    def periodic(
        h_x0: float,
        h_z0: float,
        t_max: float = 16.0 * math.pi,
        alpha: float | None = None,
    ) -> "QuenchProtocol":
        return QuenchProtocol(
            ProtocolTag.PERIODIC, h_x0, h_z0, alpha=alpha, t_max=t_max
        )


@dataclass(frozen=True)
class KickFields:
    """Angles entering one kick's exponentials.

    theta_z = tau * h_z(n*tau); theta_x is the longitudinal field integrated
    over the inter-kick window; theta_J = tau * J.
    """

    theta_z: float
    theta_x: float
    theta_J: float


def fields_at_kick(protocol: QuenchProtocol, J: float, tau: float, n: int) -> KickFields:
    """Kick angles for the n-th map.

    Linear/Constant: theta_z = tau*(h_z0 + gamma*n*tau), theta_x = tau*h_x0.
    Periodic: theta_z = tau*h_z0*cos(alpha*n*tau),
    theta_x = (h_x0/alpha)*(cos(alpha*n*tau) - cos(alpha*(n+1)*tau)).
    Evolution starts at kick n=1; n=0 is accepted as a boundary evaluation.
    """
    if tau <= 0:
        raise ValueError("tau must be > 0")
    if n < 0:
        raise ValueError("kick index must be >= 0")
    theta_J = tau * J
    if protocol.tag is ProtocolTag.PERIODIC:
        a = protocol.alpha
        theta_z = tau * protocol.h_z0 * math.cos(a * n * tau)
        theta_x = (protocol.h_x0 / a) * (
            math.cos(a * n * tau) - math.cos(a * (n + 1) * tau)
        )
    else:
        theta_z = tau * (protocol.h_z0 + protocol.gamma * n * tau)
        theta_x = tau * protocol.h_x0
    return KickFields(theta_z=theta_z, theta_x=theta_x, theta_J=theta_J)
