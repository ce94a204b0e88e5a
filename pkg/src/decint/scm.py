"""Ground-truth bivariate structural causal environments.

Three scenarios are simulated.  Writing ``f(u) = A*tanh(B*u)`` and
``g(u) = C*tanh(D*u)``:

* ``x_to_y``   - X causes Y:          ``X = n_X``, ``Y = f(X) + n_Y``
* ``y_to_x``   - Y causes X:          ``Y = n_Y``, ``X = f(Y) + n_X``
* ``confounder`` - latent U drives both: ``U = n_U``, ``Y = f(U) + n_Y``,
  ``X = g(U) + n_X``

Only the first scenario has a directed edge X -> Y, so an intervention
``do(X=x)`` shifts the outcome there and leaves it untouched in the other
two (the truncated factorization drops every edge into X).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .mixtures import MixtureOfNormals


class Scenario(enum.Enum):
    """Which ground-truth graph generated the data."""

    CAUSE_TO_EFFECT = "x_to_y"
    EFFECT_TO_CAUSE = "y_to_x"
    CONFOUNDED = "confounder"

    @property
    def has_causal_edge(self) -> bool:
        """True when X -> Y exists, i.e. interventions on X move Y."""
        return self is Scenario.CAUSE_TO_EFFECT


class NoiseMode(enum.Enum):
    """How structural-noise mixtures are generated per episode."""

    FIXED_POSITIONS = "fixed"
    FULLY_RANDOM = "random"


class DatasetKind(enum.Enum):
    OBSERVATIONAL = "observational"
    INTERVENTIONAL = "interventional"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered (x, y) pairs plus a tag saying how they were produced.

    For interventional data, ``xs`` holds the values that were forced by
    ``do(X=x)``, not draws of X.
    """

    xs: np.ndarray
    ys: np.ndarray
    kind: DatasetKind

    def __post_init__(self) -> None:
        xs = np.atleast_1d(np.asarray(self.xs, dtype=float))
        ys = np.atleast_1d(np.asarray(self.ys, dtype=float))
        if xs.shape != ys.shape or xs.ndim != 1:
            raise ValueError(f"xs/ys must be equal-length 1-D, got {xs.shape}, {ys.shape}")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if not isinstance(self.kind, DatasetKind):
            object.__setattr__(self, "kind", DatasetKind(self.kind))

    def __len__(self) -> int:
        return len(self.xs)

    @classmethod
    def empty(cls, kind: DatasetKind) -> "Dataset":
        return cls(np.empty(0), np.empty(0), kind)


def tanh_link(u, amplitude: float, slope: float):
    """Saturating link ``amplitude * tanh(slope * u)``."""
    return amplitude * np.tanh(slope * u)


def tanh_link_du(u, amplitude: float, slope: float):
    """Derivative of :func:`tanh_link` with respect to ``u``."""
    t = np.tanh(slope * u)
    return amplitude * slope * (1.0 - t * t)


@dataclass(frozen=True)
class ScenarioSpec:
    """Fully specified ground-truth environment.

    ``link_g`` and ``noise_u`` describe the confounder mechanism and must be
    present exactly when the scenario is ``CONFOUNDED``.
    """

    scenario: Scenario
    link_f: tuple[float, float] = (2.0, 1.0)
    link_g: tuple[float, float] | None = None
    noise_x: MixtureOfNormals = None
    noise_y: MixtureOfNormals = None
    noise_u: MixtureOfNormals | None = None

    def __post_init__(self) -> None:
        if self.noise_x is None or self.noise_y is None:
            raise ConfigError("noise_x and noise_y are required")
        confounded = self.scenario is Scenario.CONFOUNDED
        if confounded != (self.noise_u is not None) or confounded != (self.link_g is not None):
            raise ConfigError(
                "link_g and noise_u must be present iff the scenario is confounded"
            )

    def to_dict(self) -> dict:
        out = {
            "scenario": self.scenario.value,
            "link_f": list(self.link_f),
            "noise_x": self.noise_x.to_dict(),
            "noise_y": self.noise_y.to_dict(),
        }
        if self.scenario is Scenario.CONFOUNDED:
            out["link_g"] = list(self.link_g)
            out["noise_u"] = self.noise_u.to_dict()
        return out

    @classmethod
    def from_dict(cls, record: dict) -> "ScenarioSpec":
        return cls(
            scenario=Scenario(record["scenario"]),
            link_f=tuple(record["link_f"]),
            link_g=tuple(record["link_g"]) if record.get("link_g") else None,
            noise_x=MixtureOfNormals.from_dict(record["noise_x"]),
            noise_y=MixtureOfNormals.from_dict(record["noise_y"]),
            noise_u=MixtureOfNormals.from_dict(record["noise_u"]) if record.get("noise_u") else None,
        )


def fixed_component_positions(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Default means/variances for the fixed-position noise mode.

    Means are spread evenly over [-2, 2] (a single component sits at 0) and
    all variances are 1; for k=3 this gives means (-2, 0, 2).
    """
    if k < 1:
        raise ConfigError("component count must be >= 1")
    means = np.linspace(-2.0, 2.0, k) if k > 1 else np.zeros(1)
    return means, np.ones(k)


def generate_noise_spec(
    rng: np.random.Generator, mode: NoiseMode, k: int = 3
) -> MixtureOfNormals:
    """Draw one structural-noise mixture.

    The weights blend a uniform floor with a softmax of standard-normal
    logits, ``w = 1/(2k) + softmax(z)/2``, so every component keeps at least
    ``1/(2k)`` of the mass and no draw degenerates to a single spike.

    ``FIXED_POSITIONS`` keeps the default means/variances and randomizes only
    the weights; ``FULLY_RANDOM`` additionally draws means uniformly from
    [-4, 4] and variances from a chi-squared with 3 degrees of freedom
    (clamped to the variance floor).
    """
    if k < 1:
        raise ConfigError("component count must be >= 1")
    z = rng.standard_normal(k)
    ez = np.exp(z - z.max())
    weights = 1.0 / (2.0 * k) + 0.5 * ez / ez.sum()
    if mode is NoiseMode.FIXED_POSITIONS:
        means, variances = fixed_component_positions(k)
    else:
        means = rng.uniform(-4.0, 4.0, size=k)
        variances = rng.chisquare(3.0, size=k)
    return MixtureOfNormals(weights=weights, means=means, variances=variances)


def make_scenario_spec(
    scenario: Scenario,
    rng: np.random.Generator,
    noise_mode: NoiseMode = NoiseMode.FIXED_POSITIONS,
    k: int = 3,
    link_f: tuple[float, float] = (2.0, 1.0),
    link_g: tuple[float, float] = (2.0, 1.0),
) -> ScenarioSpec:
    """Assemble a ground-truth environment, drawing one noise spec per role.

    Noise draw order is fixed (x, y, then u for the confounded case) so a
    given generator state always yields the same environment.
    """
    noise_x = generate_noise_spec(rng, noise_mode, k)
    noise_y = generate_noise_spec(rng, noise_mode, k)
    confounded = scenario is Scenario.CONFOUNDED
    noise_u = generate_noise_spec(rng, noise_mode, k) if confounded else None
    return ScenarioSpec(
        scenario=scenario,
        link_f=link_f,
        link_g=link_g if confounded else None,
        noise_x=noise_x,
        noise_y=noise_y,
        noise_u=noise_u,
    )


def sample_observational(spec: ScenarioSpec, n: int, rng: np.random.Generator) -> Dataset:
    """Ancestral sampling of ``n`` observational pairs under the true graph."""
    if n < 0:
        raise ValueError("sample size must be nonnegative")
    a, b = spec.link_f
    if spec.scenario is Scenario.CAUSE_TO_EFFECT:
        xs = spec.noise_x.sample(rng, n)
        ys = tanh_link(xs, a, b) + spec.noise_y.sample(rng, n)
    elif spec.scenario is Scenario.EFFECT_TO_CAUSE:
        ys = spec.noise_y.sample(rng, n)
        xs = tanh_link(ys, a, b) + spec.noise_x.sample(rng, n)
    else:
        c, d = spec.link_g
        us = spec.noise_u.sample(rng, n)
        ys = tanh_link(us, a, b) + spec.noise_y.sample(rng, n)
        xs = tanh_link(us, c, d) + spec.noise_x.sample(rng, n)
    return Dataset(xs, ys, DatasetKind.OBSERVATIONAL)


def sample_interventional(
    spec: ScenarioSpec,
    x: float,
    rng: np.random.Generator,
    size: int | None = None,
):
    """Draw Y after forcing ``do(X=x)``.

    Setting X severs all edges into it, so under ``x_to_y`` the outcome is
    ``f(x) + n_Y`` while under the other two scenarios Y keeps its marginal
    distribution and ``x`` is ignored.

    Returns a scalar when ``size`` is None, otherwise an array of draws.
    """
    n = 1 if size is None else size
    a, b = spec.link_f
    if spec.scenario is Scenario.CAUSE_TO_EFFECT:
        ys = tanh_link(x, a, b) + spec.noise_y.sample(rng, n)
    elif spec.scenario is Scenario.EFFECT_TO_CAUSE:
        ys = spec.noise_y.sample(rng, n)
    else:
        us = spec.noise_u.sample(rng, n)
        ys = tanh_link(us, a, b) + spec.noise_y.sample(rng, n)
    return float(ys[0]) if size is None else ys
