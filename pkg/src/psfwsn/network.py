"""Network scenarios, path-loss channels and received-signal synthesis."""

import json
from dataclasses import dataclass, field

import numpy as np

from psfwsn.rng import substream

__all__ = [
    "SensorScenario",
    "ReceivedSignal",
    "complex_normal",
    "generate_channel",
    "generate_received",
    "resolve_values",
]


def complex_normal(rng, var, shape):
    """Circularly-symmetric complex Gaussian draws; real and imaginary parts
    each carry half of ``var`` (``var`` broadcasts against ``shape``)."""
    scale = np.sqrt(np.asarray(var, dtype=float) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def resolve_values(desc, n, rng):
    """Turn a scenario field into a length-``n`` float array.

    ``desc`` may be a scalar (broadcast), an explicit sequence, or a
    distribution descriptor ``{"dist": "uniform", "lo": a, "hi": b}``.
    """
    if isinstance(desc, dict):
        kind = desc.get("dist", "uniform")
        if kind != "uniform":
            raise ValueError(f"unsupported distribution {kind!r}")
        lo, hi = float(desc["lo"]), float(desc["hi"])
        if hi < lo:
            raise ValueError("uniform descriptor needs lo <= hi")
        return rng.uniform(lo, hi, size=n)
    arr = np.asarray(desc, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"expected {n} values, got shape {arr.shape}")
    return arr.copy()


@dataclass(frozen=True, eq=False)
class SensorScenario:
    """Geometry and noise levels of one sensor network.

    Parameters
    ----------
    n_sensors, n_antennas : int
        Number of sensors ``N`` and fusion-center antennas ``M``.
    distances : array_like
        Sensor-to-FC distances, length ``N``, all positive.
    path_loss_exp : float
        Path-loss exponent (``>= 0``).
    sensor_noise_vars : array_like
        Observation noise variance at each sensor, length ``N``, positive.
    fc_noise_var : float
        Noise variance per FC antenna, positive.
    seed : int
        Master seed for channel and noise draws.
    channel : ndarray, optional
        Explicit ``M x N`` channel; when given it bypasses the path-loss
        generator.
    """

    n_sensors: int
    n_antennas: int
    distances: np.ndarray
    path_loss_exp: float = 1.0
    sensor_noise_vars: np.ndarray = None
    fc_noise_var: float = 0.1
    seed: int = 0
    channel: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        N, M = int(self.n_sensors), int(self.n_antennas)
        if N < 1 or M < 1:
            raise ValueError("n_sensors and n_antennas must be positive")
        object.__setattr__(self, "n_sensors", N)
        object.__setattr__(self, "n_antennas", M)
        d = np.asarray(self.distances, dtype=float)
        if d.ndim == 0:
            d = np.full(N, float(d))
        sv = np.asarray(self.sensor_noise_vars, dtype=float)
        if sv.ndim == 0:
            sv = np.full(N, float(sv))
        if d.shape != (N,) or sv.shape != (N,):
            raise ValueError("distances and sensor_noise_vars must have length n_sensors")
        if not np.all(d > 0):
            raise ValueError("distances must be strictly positive")
        if not np.all(sv > 0):
            raise ValueError("sensor noise variances must be strictly positive")
        if not self.fc_noise_var > 0:
            raise ValueError("fc_noise_var must be strictly positive")
        if not self.path_loss_exp >= 0:
            raise ValueError("path_loss_exp must be >= 0")
        d.setflags(write=False)
        sv.setflags(write=False)
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "sensor_noise_vars", sv)
        object.__setattr__(self, "path_loss_exp", float(self.path_loss_exp))
        object.__setattr__(self, "fc_noise_var", float(self.fc_noise_var))
        object.__setattr__(self, "seed", int(self.seed))
        if self.channel is not None:
            H = np.array(self.channel, dtype=np.complex128)
            if H.shape != (M, N):
                raise ValueError(f"explicit channel must be {M}x{N}, got {H.shape}")
            H.setflags(write=False)
            object.__setattr__(self, "channel", H)

    @property
    def gains(self):
        """Per-sensor amplitude ``d_i^-alpha``."""
        return self.distances ** (-self.path_loss_exp)

    @classmethod
    def from_dict(cls, cfg, rng=None):
        """Build a scenario from the JSON-compatible key-value form.

        Distribution descriptors are drawn from ``rng`` (default: a
        substream of the scenario seed), distances before noise variances.
        """
        N = int(cfg["n_sensors"])
        seed = int(cfg.get("seed", 0))
        if rng is None:
            rng = substream(seed, "scenario")
        d = resolve_values(cfg["distances"], N, rng)
        sv = resolve_values(cfg["sensor_noise_vars"], N, rng)
        channel = cfg.get("channel")
        if channel is not None:
            channel = _decode_complex(channel)
        return cls(
            n_sensors=N,
            n_antennas=int(cfg["n_antennas"]),
            distances=d,
            path_loss_exp=float(cfg.get("path_loss_exp", 1.0)),
            sensor_noise_vars=sv,
            fc_noise_var=float(cfg["fc_noise_var"]),
            seed=seed,
            channel=channel,
        )

    def to_dict(self):
        out = {
            "n_sensors": self.n_sensors,
            "n_antennas": self.n_antennas,
            "distances": self.distances.tolist(),
            "path_loss_exp": self.path_loss_exp,
            "sensor_noise_vars": self.sensor_noise_vars.tolist(),
            "fc_noise_var": self.fc_noise_var,
            "seed": self.seed,
        }
        if self.channel is not None:
            out["channel"] = {"re": self.channel.real.tolist(), "im": self.channel.imag.tolist()}
        return out

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def replace(self, **changes):
        fields = dict(
            n_sensors=self.n_sensors,
            n_antennas=self.n_antennas,
            distances=self.distances,
            path_loss_exp=self.path_loss_exp,
            sensor_noise_vars=self.sensor_noise_vars,
            fc_noise_var=self.fc_noise_var,
            seed=self.seed,
            channel=self.channel,
        )
        fields.update(changes)
        return SensorScenario(**fields)


def _decode_complex(obj):
    if isinstance(obj, dict):
        return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj.get("im", 0.0), dtype=float)
    return np.asarray(obj, dtype=np.complex128)


@dataclass
class ReceivedSignal:
    """FC observation ``y`` (length ``M``, or ``draws x M``) and the ``theta`` behind it."""

    samples: np.ndarray
    truth: complex


def generate_channel(scenario, rng=None):
    """Path-loss channel ``H[j, i] = d_i^-alpha exp(j gamma_ij)``, gamma uniform on [0, 2pi).

    An explicit ``scenario.channel`` is returned unchanged (as a copy).
    """
    if scenario.channel is not None:
        return scenario.channel.copy()
    if rng is None:
        rng = substream(scenario.seed, "channel")
    M, N = scenario.n_antennas, scenario.n_sensors
    gamma = rng.uniform(0.0, 2.0 * np.pi, size=(M, N))
    return scenario.gains[None, :] * np.exp(1j * gamma)


def generate_received(theta, H, a, scenario, rng=None, noise_free=False, size=None):
    """Draw ``y = H a theta + H D v + n`` with ``D = diag(a)``.

    ``size`` draws a batch of independent observations (shape ``size x M``).
    """
    H = np.asarray(H, dtype=np.complex128)
    a = np.asarray(a, dtype=np.complex128)
    M, N = H.shape
    if a.shape != (N,):
        raise ValueError(f"phase vector has length {a.shape}, channel has {N} sensors")
    if scenario.n_sensors != N or scenario.n_antennas != M:
        raise ValueError("channel dimensions do not match the scenario")
    clean = H @ a * theta
    shape = (M,) if size is None else (int(size), M)
    if noise_free:
        return ReceivedSignal(np.broadcast_to(clean, shape).copy(), complex(theta))
    if rng is None:
        rng = substream(scenario.seed, "received")
    vshape = (N,) if size is None else (int(size), N)
    v = complex_normal(rng, scenario.sensor_noise_vars, vshape)
    n = complex_normal(rng, scenario.fc_noise_var, shape)
    y = clean + (v * a) @ H.T + n
    return ReceivedSignal(y, complex(theta))
