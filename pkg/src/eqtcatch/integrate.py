"""Fixed-step classical Runge-Kutta helpers shared by the engines."""
import math


def rk4_step(rhs, t, y, h):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def substeps(interval, max_step):
    """Number of equal RK4 steps needed so that each is at most ``max_step``."""
    return max(1, math.ceil(interval / max_step - 1e-9))
