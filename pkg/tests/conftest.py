from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

import isackit as ik

# numeric examples can blow the default per-example deadline on loaded CI
settings.register_profile("numeric", deadline=None)
settings.load_profile("numeric")
from isackit.model import (
    Alphabet,
    ChannelModel,
    DistortionSpec,
    ProblemInstance,
    StatePrior,
)

MODELS_DIR = Path(__file__).resolve().parents[1] / "models"

BITS = Alphabet(("0", "1"))
HAMMING = [[0.0, 1.0], [1.0, 0.0]]


def make_instance(w, p_s, q_s=None, distortion=HAMMING, s_hat=BITS):
    w = np.asarray(w, dtype=float)
    alphabets = [Alphabet(tuple(str(i) for i in range(k))) for k in w.shape]
    return ProblemInstance(
        channel=ChannelModel(*alphabets, w=w),
        p_s=StatePrior(p_s),
        q_s=None if q_s is None else StatePrior(q_s),
        distortion=None if distortion is None else DistortionSpec(s_hat, distortion),
    )


def zs_channel_w():
    """Y = X noiselessly, Z = S noiselessly, all binary."""
    w = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for s in range(2):
            w[x, s, x, s] = 1.0
    return w


def make_zs_instance(p1=0.1, q1=None):
    q_s = None if q1 is None else [1 - q1, q1]
    return make_instance(zs_channel_w(), [1 - p1, p1], q_s)


def make_xor_zs_instance(p1=0.1):
    """Y = X xor S, Z = S; sensing is free (zero cost) for every input."""
    w = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for s in range(2):
            w[x, s, x ^ s, s] = 1.0
    return make_instance(w, [1 - p1, p1])


def make_uninformative_echo_instance(p1=0.1, q1=None):
    """Y = X noiselessly; Z uniform, independent of (X, S)."""
    w = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for s in range(2):
            w[x, s, x, :] = 0.5
    q_s = None if q1 is None else [1 - q1, q1]
    return make_instance(w, [1 - p1, p1], q_s)


def make_noisy_echo_instance(flip=0.2, p1=0.5):
    """Y = X noiselessly; Z = S xor N with N ~ Ber(flip)."""
    w = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for s in range(2):
            w[x, s, x, s] = 1 - flip
            w[x, s, x, 1 - s] = flip
    return make_instance(w, [1 - p1, p1])


def random_instance(rng, nx=2, ns=2, ny=2, nz=2, nshat=None, with_q=False):
    """Full-support random instance; distortion entries in [0, 2)."""
    nshat = ns if nshat is None else nshat
    w = rng.random((nx, ns, ny, nz))
    w /= w.sum(axis=(2, 3), keepdims=True)
    p = rng.random(ns) + 0.1
    p /= p.sum()
    q = None
    if with_q:
        q = rng.random(ns) + 0.1
        q /= q.sum()
    d = rng.random((nshat, ns)) * 2.0
    return make_instance(
        w, p, q, distortion=d,
        s_hat=Alphabet(tuple(str(i) for i in range(nshat))),
    )


@pytest.fixture(scope="session")
def sc1():
    return ik.load_model(MODELS_DIR / "sc1.json")


@pytest.fixture(scope="session")
def sc1ht():
    return ik.load_model(MODELS_DIR / "sc1ht.json")
