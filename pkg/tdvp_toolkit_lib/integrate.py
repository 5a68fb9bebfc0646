"""Fixed-step classical Runge-Kutta driver shared by all integrators."""

from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional

import numpy as np

from tdvp_toolkit_lib import misc


logger = misc.get_logger(__name__)


@dataclass
class Trajectory:
    """Sampled trajectory: sample times and, optionally, the sampled states."""

    times: List[float] = field(default_factory=list)
    states: List[Any] = field(default_factory=list)
    # Free-form diagnostics collected during the run (e.g. clipping events).
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def final(self):
        if not self.states:
            raise ValueError("Trajectory holds no states.")
        return self.states[-1]


def rk4_step(rhs, t, y, dt):
    """One classical 4th-order Runge-Kutta step of dy/dt = rhs(t, y).

    :param rhs: Callable (t, y) -> dy/dt, y an ndarray.
    :param t: Current time.
    :param y: Current state.
    :param dt: Time step.
    :return: State at t + dt.
    """
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def sample_grid(t_final, dt, sample_interval):
    """Validates the time grid.

    :return: Tuple (n_samples, steps_per_sample); samples are taken at
      k * sample_interval for k = 0..n_samples-1.
    """
    if not dt > 0:
        raise ValueError("Time step must be positive, got {}.".format(dt))
    if not t_final > 0:
        raise ValueError("Final time must be positive, got {}.".format(t_final))
    if sample_interval < dt:
        raise ValueError(
            "Sample interval {} is smaller than the time step {}.".format(sample_interval, dt)
        )
    steps_per_sample = int(round(sample_interval / dt))
    if abs(steps_per_sample * dt - sample_interval) > 1e-9 * sample_interval:
        raise ValueError(
            "Sample interval {} is not a multiple of the time step {}.".format(sample_interval, dt)
        )
    n_intervals = int(round(t_final / sample_interval))
    if abs(n_intervals * sample_interval - t_final) > 1e-9 * t_final:
        raise ValueError(
            "Final time {} is not a multiple of the sample interval {}.".format(
                t_final, sample_interval
            )
        )
    return n_intervals + 1, steps_per_sample


def integrate_fixed_step(
    rhs: Callable,
    y0: np.ndarray,
    t_final: float,
    dt: float,
    sample_interval: Optional[float] = None,
    after_step: Optional[Callable] = None,
    on_sample: Optional[Callable] = None,
    keep_states: bool = True,
    name: str = "rk4",
):
    """Integrates dy/dt = rhs(t, y) with fixed RK4 steps.

    :param rhs: Callable (t, y) -> dy/dt.
    :param y0: Initial state (ndarray).
    :param t_final: Final time.
    :param dt: Time step.
    :param sample_interval: Sampling period (multiple of dt). Default: dt.
    :param after_step: Optional callable (t, y) -> y applied after every step;
      used for invariant checks and projections. May raise misc.NumericalAbort.
    :param on_sample: Optional callable (t, y) invoked at every sample time.
    :param keep_states: Whether to store the sampled states in the trajectory.
    :param name: Name used in log messages.
    :return: Trajectory.
    """
    if sample_interval is None:
        sample_interval = dt
    n_samples, steps_per_sample = sample_grid(t_final, dt, sample_interval)

    logger.info(
        "{}: integrating to t={} with dt={} ({} samples)".format(name, t_final, dt, n_samples)
    )

    traj = Trajectory()
    y = np.array(y0, copy=True)

    def record(t, y):
        traj.times.append(t)
        if keep_states:
            traj.states.append(np.array(y, copy=True))
        if on_sample is not None:
            on_sample(t, y)

    record(0.0, y)
    for k in range(1, n_samples):
        t_start = (k - 1) * sample_interval
        for s in range(steps_per_sample):
            t = t_start + s * dt
            y = rk4_step(rhs, t, y, dt)
            if not np.all(np.isfinite(y)):
                raise misc.NumericalAbort(
                    "{}: non-finite state at t={:.6f} (step too large?)".format(name, t + dt)
                )
            if after_step is not None:
                y = after_step(t + dt, y)
        record(k * sample_interval, y)

    logger.info("{}: done, {} samples".format(name, len(traj.times)))
    return traj
