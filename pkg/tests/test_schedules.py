import math

import numpy as np
import pytest

from floquet_otoc.schedules import (
    ProtocolTag,
    QuenchProtocol,
    fields_at_kick,
)


def test_linear_angles_formula():
    proto = QuenchProtocol.linear(h_x0=0.5, h_z0=1.0, gamma=0.1)
    tau = math.pi / 6
    for n in (0, 1, 7):
        f = fields_at_kick(proto, J=1.0, tau=tau, n=n)
        assert f.theta_z == pytest.approx(tau * (1.0 + 0.1 * n * tau), abs=1e-15)
        assert f.theta_x == pytest.approx(tau * 0.5, abs=1e-15)
        assert f.theta_J == pytest.approx(tau, abs=1e-15)


def test_constant_is_linear_with_zero_slope():
    const = QuenchProtocol.constant(h_x0=0.3, h_z0=2.0)
    lin = QuenchProtocol.linear(h_x0=0.3, h_z0=2.0, gamma=0.0)
    for n in range(5):
        fc = fields_at_kick(const, J=1.0, tau=0.4, n=n)
        fl = fields_at_kick(lin, J=1.0, tau=0.4, n=n)
        assert (fc.theta_z, fc.theta_x, fc.theta_J) == (fl.theta_z, fl.theta_x, fl.theta_J)


def test_periodic_alpha_default_and_override():
    proto = QuenchProtocol.periodic(h_x0=1.0, h_z0=4.0, t_max=16.0 * math.pi)
    assert proto.alpha == pytest.approx(math.pi / (2 * 16 * math.pi))
    proto2 = QuenchProtocol.periodic(h_x0=1.0, h_z0=4.0, t_max=8.0, alpha=0.25)
    assert proto2.alpha == 0.25


def test_periodic_theta_z_is_instantaneous_cosine():
    t_max = 8 * math.pi
    proto = QuenchProtocol.periodic(h_x0=0.0, h_z0=4.0, t_max=t_max)
    tau = math.pi / 4
    for n in (0, 3, 11):
        f = fields_at_kick(proto, J=1.0, tau=tau, n=n)
        assert f.theta_z == pytest.approx(
            tau * 4.0 * math.cos(proto.alpha * n * tau), abs=1e-15
        )


def test_periodic_theta_x_equals_integrated_field():
    """theta_x must equal the integral of h_x0 sin(alpha t) over one window."""
    t_max = 16 * math.pi
    proto = QuenchProtocol.periodic(h_x0=0.7, h_z0=4.0, t_max=t_max)
    tau = math.pi / 6
    a = proto.alpha
    for n in (0, 1, 5, 20):
        f = fields_at_kick(proto, J=1.0, tau=tau, n=n)
        ts = np.linspace(n * tau, (n + 1) * tau, 20001)
        quad = np.trapezoid(0.7 * np.sin(a * ts), ts)
        assert f.theta_x == pytest.approx(quad, abs=1e-9)


def test_validation_errors():
    with pytest.raises(ValueError, match="t_max"):
        QuenchProtocol.periodic(h_x0=1.0, h_z0=1.0, t_max=0.0)
    with pytest.raises(ValueError, match="gamma"):
        QuenchProtocol.linear(h_x0=1.0, h_z0=1.0, gamma=-0.5)
    proto = QuenchProtocol.constant(h_x0=1.0, h_z0=1.0)
    with pytest.raises(ValueError, match="tau"):
        fields_at_kick(proto, J=1.0, tau=0.0, n=1)
    with pytest.raises(ValueError, match="kick"):
        fields_at_kick(proto, J=1.0, tau=0.3, n=-1)


def test_tags():
    assert QuenchProtocol.constant(0.0, 1.0).tag is ProtocolTag.CONSTANT
    assert QuenchProtocol.linear(0.0, 1.0, 0.1).tag is ProtocolTag.LINEAR
    assert QuenchProtocol.periodic(0.0, 1.0).tag is ProtocolTag.PERIODIC
