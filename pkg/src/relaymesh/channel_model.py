"""The T-node Gaussian multiple-relay channel and distance-based channel gains.

Nodes are numbered 1..T as in the usual convention: node 1 is the source,
node T the destination and 2..T-1 are relays. Node 1 only transmits and
node T only receives. All quantities are linear (not dB).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, ValidationError

FRIIS = "friis"
SPL = "spl"
MPL = "mpl"
MODELS = (FRIIS, SPL, MPL)


@dataclass(frozen=True)
class PathLossModel:
    """Distance-to-gain law.

    ``spl``   kappa * d**-eta         (diverges at d -> 0)
    ``mpl``   kappa * (1 + d)**-eta   (bounded for d >= 0)
    ``friis`` G / (4 pi f d)**2
    """

    variant: str = MPL
    kappa: float = 1.0
    eta: float = 2.0
    antenna_gain: float = 1.0
    frequency: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "variant", self.variant.lower())
        if self.variant not in MODELS:
            raise ValidationError(f"unknown path-loss model {self.variant!r}; expected one of {MODELS}")
        if self.variant == FRIIS:
            if not (self.antenna_gain > 0 and math.isfinite(self.antenna_gain)):
                raise ValidationError("Friis antenna gain must be positive and finite")
            if not (self.frequency > 0 and math.isfinite(self.frequency)):
                raise ValidationError("Friis carrier frequency must be positive and finite")
        else:
            if not (self.kappa > 0 and math.isfinite(self.kappa)):
                raise ValidationError(f"kappa must be positive, got {self.kappa}")
            if not (self.eta >= 2 and math.isfinite(self.eta)):
                raise ValidationError(f"eta must be >= 2, got {self.eta}")

    def to_dict(self) -> dict:
        if self.variant == FRIIS:
            return {"model": FRIIS, "gain": self.antenna_gain, "frequency": self.frequency}
        return {"model": self.variant, "kappa": self.kappa, "eta": self.eta}

    @classmethod
    def from_dict(cls, d: dict) -> "PathLossModel":
        try:
            variant = str(d["model"]).lower()
        except KeyError:
            raise ValidationError("path_loss: missing field 'model'") from None
        if variant == FRIIS:
            return cls(FRIIS, antenna_gain=float(d.get("gain", 1.0)), frequency=float(d["frequency"]))
        return cls(variant, kappa=float(d.get("kappa", 1.0)), eta=float(d.get("eta", 2.0)))


def path_loss_gain(model: PathLossModel, d: float) -> float:
    """Linear channel gain at distance ``d``."""
    if not d >= 0 or math.isnan(d):
        raise DomainError(f"distance must be nonnegative, got {d}")
    if model.variant == MPL:
        return model.kappa * (1.0 + d) ** (-model.eta)
    if d == 0:
        raise DomainError(f"{model.variant} gain diverges at d = 0")
    if model.variant == SPL:
        return model.kappa * d ** (-model.eta)
    return model.antenna_gain / (4.0 * math.pi * model.frequency * d) ** 2


@dataclass(frozen=True, eq=False)
class RelayNetwork:
    """Validated T-node Gaussian relay network.

    ``powers[k]`` is the power of node k+1 (nodes 1..T-1), ``noises[k]`` the
    noise variance at node k+2 (nodes 2..T), and ``gains[i-1, j-1]`` the gain
    from node i to node j. Rows/columns that cannot carry a link are zero.
    """

    T: int
    powers: np.ndarray
    noises: np.ndarray
    gains: np.ndarray
    positions: Optional[np.ndarray] = None
    path_loss: Optional[PathLossModel] = None

    def P(self, i: int) -> float:
        return float(self.powers[i - 1])

    def N(self, j: int) -> float:
        return float(self.noises[j - 2])

    def gain(self, i: int, j: int) -> float:
        return float(self.gains[i - 1, j - 1])

    @property
    def relays(self) -> tuple[int, ...]:
        return tuple(range(2, self.T))

    @property
    def receivers(self) -> tuple[int, ...]:
        return tuple(range(2, self.T + 1))

    def distance(self, i: int, j: int) -> float:
        if self.positions is None:
            raise ValidationError("network has no geometry")
        return float(np.linalg.norm(self.positions[i - 1] - self.positions[j - 1]))

    def replace(self, powers=None, noises=None) -> "RelayNetwork":
        """Copy with new powers and/or noises; gains and geometry are kept."""
        src = {"gains": self.gains} if self.positions is None else {
            "positions": self.positions, "path_loss": self.path_loss}
        return build_network(
            self.powers if powers is None else powers,
            self.noises if noises is None else noises,
            **src,
        )

    def __eq__(self, other):
        if not isinstance(other, RelayNetwork):
            return NotImplemented
        same_geo = (self.positions is None and other.positions is None) or (
            self.positions is not None
            and other.positions is not None
            and np.array_equal(self.positions, other.positions)
        )
        return (
            self.T == other.T
            and np.array_equal(self.powers, other.powers)
            and np.array_equal(self.noises, other.noises)
            and np.array_equal(self.gains, other.gains)
            and same_geo
            and self.path_loss == other.path_loss
        )

    def to_config(self) -> dict:
        cfg = {"T": self.T, "powers": self.powers.tolist(), "noises": self.noises.tolist()}
        if self.positions is not None:
            pos = self.positions
            cfg["geometry"] = pos[:, 0].tolist() if pos.shape[1] == 1 else pos.tolist()
            cfg["path_loss"] = self.path_loss.to_dict()
        else:
            cfg["gains"] = self.gains.tolist()
        return cfg


def _positive_vector(name, values, length):
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.size != length:
        raise ValidationError(f"{name}: expected {length} entries, got {arr.size}")
    bad = ~(np.isfinite(arr) & (arr > 0))
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise ValidationError(f"{name}[{k}] = {arr[k]!r} must be positive and finite")
    return arr


def _as_positions(geometry, T):
    pos = np.asarray(geometry, dtype=float)
    if pos.ndim == 1:
        pos = pos[:, None]
    if pos.ndim != 2 or pos.shape[0] != T or pos.shape[1] not in (1, 2):
        raise ValidationError(f"geometry: expected {T} positions on a line or in the plane, got shape {pos.shape}")
    if not np.isfinite(pos).all():
        raise ValidationError("geometry: positions must be finite")
    return pos


def build_network(
    powers: Sequence[float],
    noises: Sequence[float],
    gains=None,
    positions=None,
    path_loss: Optional[PathLossModel] = None,
) -> RelayNetwork:
    """Assemble and validate a network.

    Pass either an explicit ``gains`` matrix (T x T, row = transmitter) or
    ``positions`` plus a ``path_loss`` model. ``T`` is inferred from
    ``powers`` (T-1 entries, nodes 1..T-1).
    """
    T = len(np.asarray(powers, dtype=float).reshape(-1)) + 1
    if T < 2:
        raise ValidationError("need at least a source and a destination (T >= 2)")
    p = _positive_vector("powers", powers, T - 1)
    n = _positive_vector("noises", noises, T - 1)

    if (gains is None) == (positions is None):
        raise ValidationError("provide exactly one of an explicit gain matrix or a geometry")

    pos = None
    if gains is not None:
        g = np.asarray(gains, dtype=float)
        if g.shape != (T, T):
            raise ValidationError(f"gains: expected a {T}x{T} matrix, got shape {g.shape}")
        if not np.isfinite(g).all():
            raise ValidationError("gains: entries must be finite")
        if (g < 0).any():
            i, j = np.argwhere(g < 0)[0]
            raise ValidationError(f"gains[{i}][{j}] = {g[i, j]} is negative")
        if g[:, 0].any() or g[T - 1, :].any() or np.diag(g).any():
            raise ValidationError(
                "gains: column 1 (source never receives), row T (destination never "
                "transmits) and the diagonal must be zero"
            )
        g = g.copy()
    else:
        if path_loss is None:
            raise ValidationError("geometry given without a path-loss model")
        pos = _as_positions(positions, T)
        g = np.zeros((T, T))
        for i in range(1, T):
            for j in range(2, T + 1):
                if i != j:
                    d = float(np.linalg.norm(pos[i - 1] - pos[j - 1]))
                    g[i - 1, j - 1] = path_loss_gain(path_loss, d)
    for a in (p, n, g):
        a.setflags(write=False)
    if pos is not None:
        pos.setflags(write=False)
    return RelayNetwork(T, p, n, g, pos, path_loss if pos is not None else None)


def collinear_single_relay(
    d12: float,
    path_loss: PathLossModel,
    P1: float = 1.0,
    P2: float = 1.0,
    N2: float = 1.0,
    N3: float = 1.0,
    d13: float = 1.0,
) -> RelayNetwork:
    """Source at 0, relay at ``d12``, destination at ``d13`` on a line."""
    if not 0 <= d12 <= d13:
        raise ValidationError(f"relay position d12={d12} must lie in [0, d13={d13}]")
    return build_network([P1, P2], [N2, N3], positions=[0.0, d12, d13], path_loss=path_loss)


def single_relay_gains(l12: float, l13: float, l23: float) -> np.ndarray:
    """3x3 gain matrix from the three single-relay link gains."""
    return np.array([[0.0, l12, l13], [0.0, 0.0, l23], [0.0, 0.0, 0.0]])


def db_to_linear(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def network_from_config(cfg: dict, db: bool = False) -> RelayNetwork:
    """Build a network from a parsed JSON config (see README for the schema).

    With ``db=True`` the powers, noises and explicit gains are read in dB.
    """
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    for key in ("T", "powers", "noises"):
        if key not in cfg:
            raise ValidationError(f"config: missing field {key!r}")
    T = cfg["T"]
    if not isinstance(T, int) or T < 2:
        raise ValidationError(f"config field 'T': expected an integer >= 2, got {T!r}")
    conv = db_to_linear if db else (lambda v: np.asarray(v, dtype=float))
    try:
        powers = conv(cfg["powers"])
        noises = conv(cfg["noises"])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"config: powers/noises must be numeric lists ({exc})") from None
    if powers.size != T - 1:
        raise ValidationError(f"config field 'powers': expected {T - 1} entries for T={T}, got {powers.size}")
    if noises.size != T - 1:
        raise ValidationError(f"config field 'noises': expected {T - 1} entries for T={T}, got {noises.size}")
    if "gains" in cfg:
        g = np.asarray(cfg["gains"], dtype=float)
        if db:
            # absent links are null in dB configs
            absent = np.isnan(g)
            g = np.where(absent, 0.0, 10.0 ** (np.where(absent, 0.0, g) / 10.0))
        return build_network(powers, noises, gains=g)
    if "geometry" in cfg:
        if "path_loss" not in cfg:
            raise ValidationError("config: 'geometry' requires a 'path_loss' object")
        return build_network(
            powers, noises, positions=cfg["geometry"], path_loss=PathLossModel.from_dict(cfg["path_loss"])
        )
    raise ValidationError("config: need either 'gains' or 'geometry' + 'path_loss'")
