"""Data model for finite-alphabet sensing/communication problem instances.

A problem instance bundles a memoryless four-terminal channel law
``w[x][s][y][z]`` over finite alphabets with a state prior, an optional
alternative state prior (for detection problems), and an optional bounded
distortion table (for reconstruction problems).  Symbol labels are opaque
strings used only at the I/O boundary; all numerics are index-based.

Construction is permissive: numeric invariants are checked by
:func:`validate_model`, which reports violations as data instead of
raising.  Structural problems in model *files* (unknown keys, ragged
arrays) raise :class:`ModelFormatError`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

# Absolute per-row tolerance for stochasticity checks; generous enough to
# survive a text-format round trip of 64-bit floats.
ROW_SUM_TOL = 1e-9

_REQUIRED_KEYS = ("x", "s", "y", "z", "channel", "p_s")
_OPTIONAL_KEYS = ("q_s", "s_hat", "distortion")


class ModelFormatError(ValueError):
    """A model document is structurally malformed (not a validation issue)."""


def _freeze(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def as_pmf(p) -> np.ndarray:
    """Coerce a raw vector or a wrapper exposing ``.p`` into a float array."""
    return np.asarray(getattr(p, "p", p), dtype=float)


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of symbol labels; index = position."""

    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        return self.labels.index(label)


@dataclass(frozen=True)
class ChannelModel:
    """Stationary transition law w[x][s][y][z] over four finite alphabets."""

    x: Alphabet
    s: Alphabet
    y: Alphabet
    z: Alphabet
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", _freeze(self.w))


@dataclass(frozen=True)
class StatePrior:
    """Pmf over the state alphabet."""

    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _freeze(self.p))


@dataclass(frozen=True)
class InputDistribution:
    """Pmf over the input alphabet."""

    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _freeze(self.p))


@dataclass(frozen=True)
class DistortionSpec:
    """Reconstruction alphabet plus bounded distortion table d[s_hat][s]."""

    s_hat: Alphabet
    d: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d", _freeze(self.d))


@dataclass(frozen=True)
class ProblemInstance:
    channel: ChannelModel
    p_s: StatePrior
    q_s: Optional[StatePrior] = None
    distortion: Optional[DistortionSpec] = None


def _check_alphabet(name: str, alphabet: Alphabet, report: list):
    if alphabet.size < 1:
        report.append(f"alphabet '{name}' is empty")
    if len(set(alphabet.labels)) != alphabet.size:
        report.append(f"alphabet '{name}' has duplicate labels")


def _check_prior(name: str, prior: StatePrior, n_states: int, report: list):
    p = prior.p
    if p.ndim != 1 or p.shape[0] != n_states:
        report.append(f"{name}: length {p.shape} does not match state alphabet size {n_states}")
        return
    if not np.isfinite(p).all() or (p < 0).any():
        report.append(f"{name}: entries must be finite and >= 0")
        return
    total = p.sum()
    if abs(total - 1.0) > ROW_SUM_TOL:
        report.append(f"{name}: prior sum != 1 (got {total!r})")


def validate_model(instance: ProblemInstance) -> list:
    """Check every type invariant; return a list of violations (empty = valid)."""
    report: list = []
    ch = instance.channel
    for name, alphabet in (("x", ch.x), ("s", ch.s), ("y", ch.y), ("z", ch.z)):
        _check_alphabet(name, alphabet, report)

    expected = (ch.x.size, ch.s.size, ch.y.size, ch.z.size)
    if ch.w.shape != expected:
        report.append(f"channel: shape {ch.w.shape} does not match alphabets {expected}")
    else:
        if not np.isfinite(ch.w).all() or (ch.w < 0).any():
            report.append("channel: entries must be finite and >= 0")
        else:
            rows = ch.w.sum(axis=(2, 3))
            for xi, si in zip(*np.where(np.abs(rows - 1.0) > ROW_SUM_TOL)):
                report.append(
                    f"channel row (x={ch.x.labels[xi]!r}, s={ch.s.labels[si]!r}) "
                    f"sums to {rows[xi, si]!r}"
                )

    _check_prior("p_s", instance.p_s, ch.s.size, report)
    if instance.q_s is not None:
        _check_prior("q_s", instance.q_s, ch.s.size, report)

    if instance.distortion is not None:
        spec = instance.distortion
        _check_alphabet("s_hat", spec.s_hat, report)
        if spec.d.ndim != 2 or spec.d.shape != (spec.s_hat.size, ch.s.size):
            report.append(
                f"distortion: shape {spec.d.shape} does not match "
                f"(s_hat, s) = ({spec.s_hat.size}, {ch.s.size})"
            )
        elif not np.isfinite(spec.d).all() or (spec.d < 0).any():
            report.append("distortion: entries must be finite and >= 0")
    return report


def split_marginals(channel: ChannelModel):
    """Coordinate marginals (P_{Y|XS}, P_{Z|XS}) of the joint law, as [x,s,·] arrays."""
    y_given_xs = _freeze(channel.w.sum(axis=3))
    z_given_xs = _freeze(channel.w.sum(axis=2))
    return y_given_xs, z_given_xs


def mix_over_state(cond, prior) -> np.ndarray:
    """Average a conditional table [x,s,o] over the state prior: out[x,o]."""
    cond = np.asarray(cond, dtype=float)
    return np.einsum("xso,s->xo", cond, as_pmf(prior))


# ---------------------------------------------------------------------------
# Model file format: one JSON object with keys x, s, y, z (arrays of strings),
# channel (4-deep nested array [x][s][y][z]), p_s, optional q_s, and an
# optional s_hat / distortion ([s_hat][s]) pair.  Unknown keys are rejected.
# ---------------------------------------------------------------------------

def _string_list(doc: dict, key: str):
    value = doc[key]
    if not isinstance(value, list) or not value or not all(isinstance(v, str) for v in value):
        raise ModelFormatError(f"'{key}' must be a non-empty array of strings")
    return value


def _numeric_array(doc: dict, key: str, ndim: int) -> np.ndarray:
    try:
        arr = np.array(doc[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"'{key}' must be a rectangular numeric array: {exc}") from None
    if arr.ndim != ndim:
        raise ModelFormatError(f"'{key}' must be a {ndim}-deep nested array, got depth {arr.ndim}")
    return arr


def instance_from_dict(doc) -> ProblemInstance:
    """Build a :class:`ProblemInstance` from a parsed model document."""
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    unknown = sorted(set(doc) - set(_REQUIRED_KEYS) - set(_OPTIONAL_KEYS))
    if unknown:
        raise ModelFormatError(f"unknown keys in model file: {', '.join(unknown)}")
    missing = [k for k in _REQUIRED_KEYS if k not in doc]
    if missing:
        raise ModelFormatError(f"missing required keys: {', '.join(missing)}")
    if ("s_hat" in doc) != ("distortion" in doc):
        raise ModelFormatError("'s_hat' and 'distortion' must be given together")

    channel = ChannelModel(
        x=Alphabet(_string_list(doc, "x")),
        s=Alphabet(_string_list(doc, "s")),
        y=Alphabet(_string_list(doc, "y")),
        z=Alphabet(_string_list(doc, "z")),
        w=_numeric_array(doc, "channel", 4),
    )
    p_s = StatePrior(_numeric_array(doc, "p_s", 1))
    q_s = StatePrior(_numeric_array(doc, "q_s", 1)) if "q_s" in doc else None
    distortion = None
    if "s_hat" in doc:
        distortion = DistortionSpec(
            s_hat=Alphabet(_string_list(doc, "s_hat")),
            d=_numeric_array(doc, "distortion", 2),
        )
    return ProblemInstance(channel=channel, p_s=p_s, q_s=q_s, distortion=distortion)


def instance_to_dict(instance: ProblemInstance) -> dict:
    ch = instance.channel
    doc = {
        "x": list(ch.x.labels),
        "s": list(ch.s.labels),
        "y": list(ch.y.labels),
        "z": list(ch.z.labels),
        "channel": ch.w.tolist(),
        "p_s": instance.p_s.p.tolist(),
    }
    if instance.q_s is not None:
        doc["q_s"] = instance.q_s.p.tolist()
    if instance.distortion is not None:
        doc["s_hat"] = list(instance.distortion.s_hat.labels)
        doc["distortion"] = instance.distortion.d.tolist()
    return doc


def load_model(path) -> ProblemInstance:
    """Load and structurally parse a model file (no numeric validation)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not valid JSON: {exc}") from None
    return instance_from_dict(doc)
