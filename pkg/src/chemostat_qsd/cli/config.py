"""Run configuration: YAML loading and per-subcommand blocks."""

import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml
from loguru import logger

from ..common.errors import ConfigurationError
from ..flow.solver import FlowSolverConfig
from ..model.params import ChemostatParams


class _UniqueKeyLoader(yaml.SafeLoader):
    """SafeLoader that rejects repeated mapping keys."""

    def construct_mapping(self, node, deep=False):
        seen = set()
        for key_node, _ in node.value:
            key = self.construct_object(key_node, deep=deep)
            if key in seen:
                line = key_node.start_mark.line + 1
                raise ConfigurationError(
                    f"duplicate key {key!r}",
                    issues=[f"{key}: duplicate key at line {line}"],
                )
            seen.add(key)
        return super().construct_mapping(node, deep=deep)


def _block(cls, config: dict[str, Any] | None, prefix: str):
    """Build a block dataclass from a mapping, itemizing every bad key."""
    config = config or {}
    if not isinstance(config, dict):
        raise ConfigurationError(
            f"{prefix} must be a mapping, got {type(config).__name__}"
        )
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    issues = [f"{prefix}.{key}: unknown key" for key in sorted(set(config) - names)]
    for key in sorted(set(config) & names):
        value = config[key]
        expected = hints[key]
        if expected in (float, int) and (
            isinstance(value, bool) or not isinstance(value, int | float)
        ):
            issues.append(f"{prefix}.{key}: must be a number, got {value!r}")
    if issues:
        raise ConfigurationError(f"invalid {prefix} block", issues=issues)
    values = {
        key: float(value) if hints[key] is float else value
        for key, value in config.items()
    }
    return cls(**values)


def _positive(prefix: str, **values) -> list[str]:
    return [
        f"{prefix}.{name}: must be positive, got {value}"
        for name, value in values.items()
        if value is not None and not value > 0
    ]


@dataclass
class FlowBlock:
    """Flow curves, inverse-time table and equilibria."""

    ells: list[int] = field(default_factory=lambda: [1, 2, 3])
    s0_values: list[float] = field(default_factory=lambda: [0.1, 1.5])
    horizon: float = 5.0
    points: int = 101
    equilibria_max: int = 20

    def __post_init__(self):
        issues = _positive(
            "flow", horizon=self.horizon, equilibria_max=self.equilibria_max
        )
        if self.points < 2:
            issues.append(f"flow.points: must be >= 2, got {self.points}")
        if any(ell < 0 for ell in self.ells):
            issues.append(f"flow.ells: must be nonnegative, got {self.ells}")
        if any(s < 0 for s in self.s0_values):
            issues.append(f"flow.s0_values: must be nonnegative, got {self.s0_values}")
        if issues:
            raise ConfigurationError("invalid flow block", issues=issues)


@dataclass
class SimulateBlock:
    """Trajectories from one start plus first-event and mean checks."""

    x0: int = 1
    s0: float = 0.1
    horizon: float = 10.0
    save_paths: int = 10
    check_times: list[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])
    first_event_deltas: list[float] = field(default_factory=lambda: [0.1, 0.3, 0.5])

    def __post_init__(self):
        issues = _positive("simulate", x0=self.x0, horizon=self.horizon)
        if self.s0 < 0:
            issues.append(f"simulate.s0: must be nonnegative, got {self.s0}")
        if any(not 0 <= t <= self.horizon for t in self.check_times):
            issues.append("simulate.check_times: must lie in [0, horizon]")
        if issues:
            raise ConfigurationError("invalid simulate block", issues=issues)


@dataclass
class LyapunovBlock:
    """Constants search and grid of the drift certificates."""

    rho: float = 2.0
    p: float | None = None
    p_fraction: float = 0.5
    x_max: int = 50
    s_points: int = 2000
    theta: float | None = None
    eta: float | None = None
    zeta: float | None = None
    g_delta1: float = 1.0
    g_check: bool = True

    def __post_init__(self):
        issues = _positive(
            "lyapunov", p=self.p, x_max=self.x_max, g_delta1=self.g_delta1
        )
        if not self.rho > 1:
            issues.append(f"lyapunov.rho: must exceed 1, got {self.rho}")
        if not 0 < self.p_fraction < 1:
            issues.append(
                f"lyapunov.p_fraction: must lie in (0, 1), got {self.p_fraction}"
            )
        if issues:
            raise ConfigurationError("invalid lyapunov block", issues=issues)


@dataclass
class QsdBlock:
    """QSD, λ and Yaglom diagnostics."""

    method: str = "both"
    x0: int = 1
    s0: float = 0.1
    t: float = 20.0
    particles: int = 2000
    s_bins: int = 64
    lambda_times: list[float] = field(
        default_factory=lambda: [2.0, 4.0, 6.0, 8.0, 10.0]
    )
    fixed_point_dt: float = 1.0
    yaglom_starts: list[list[float]] = field(
        default_factory=lambda: [[1, 0.1], [4, 0.45], [2, 1.5]]
    )
    yaglom_times: list[float] = field(default_factory=lambda: [2.0, 5.0, 10.0, 20.0])
    yaglom: bool = False

    def __post_init__(self):
        issues = _positive(
            "qsd", x0=self.x0, t=self.t, particles=self.particles, s_bins=self.s_bins
        )
        if self.method not in ("naive", "fleming_viot", "both"):
            issues.append(
                f"qsd.method: must be naive, fleming_viot or both, got {self.method!r}"
            )
        if any(len(start) != 2 for start in self.yaglom_starts):
            issues.append("qsd.yaglom_starts: each start must be [x, s]")
        if len(set(self.yaglom_times)) < 2:
            issues.append("qsd.yaglom_times: need at least two distinct times")
        if issues:
            raise ConfigurationError("invalid qsd block", issues=issues)


@dataclass
class BoundsBlock:
    """Birth-death table, small set, hitting scenario and moment checks."""

    bd_n_max: int = 5
    bd_ell_max: int = 3
    bd_t: float = 0.4
    tau0: float = 0.1
    delta1: float | None = None
    delta2: float | None = None
    small_set_starts: int = 3
    hitting: dict[str, Any] | None = None
    moment_x: int = 1
    moment_t: float = 0.3
    exp_moment_start: list[float] | None = None
    exp_moment_t_cap: float = 200.0

    def __post_init__(self):
        issues = _positive(
            "bounds",
            bd_n_max=self.bd_n_max,
            bd_ell_max=self.bd_ell_max,
            bd_t=self.bd_t,
            tau0=self.tau0,
            moment_x=self.moment_x,
            moment_t=self.moment_t,
            exp_moment_t_cap=self.exp_moment_t_cap,
        )
        if self.exp_moment_start is not None and len(self.exp_moment_start) != 2:
            issues.append("bounds.exp_moment_start: must be [x, s]")
        if issues:
            raise ConfigurationError("invalid bounds block", issues=issues)


_BLOCKS = {
    "flow": FlowBlock,
    "simulate": SimulateBlock,
    "lyapunov": LyapunovBlock,
    "qsd": QsdBlock,
    "bounds": BoundsBlock,
}
_TOP_LEVEL = {"model", "solver", "seed", "replicas", "threads", "output_dir", *_BLOCKS}


@dataclass
class RunConfig:
    """Everything one invocation needs, after validation."""

    model: ChemostatParams
    solver: FlowSolverConfig = field(default_factory=FlowSolverConfig)
    seed: int | None = None
    replicas: int = 10_000
    threads: int | None = None
    output_dir: Path = Path("runs")
    flow: FlowBlock = field(default_factory=FlowBlock)
    simulate: SimulateBlock = field(default_factory=SimulateBlock)
    lyapunov: LyapunovBlock = field(default_factory=LyapunovBlock)
    qsd: QsdBlock = field(default_factory=QsdBlock)
    bounds: BoundsBlock = field(default_factory=BoundsBlock)

    def __post_init__(self):
        issues = []
        if self.seed is not None and (
            isinstance(self.seed, bool)
            or not isinstance(self.seed, int)
            or not 0 <= self.seed < 2**64
        ):
            issues.append(
                f"seed: must be an unsigned 64-bit integer, got {self.seed!r}"
            )
        if isinstance(self.replicas, bool) or not isinstance(self.replicas, int):
            issues.append(f"replicas: must be an integer, got {self.replicas!r}")
        elif self.replicas < 1:
            issues.append(f"replicas: must be positive, got {self.replicas}")
        if self.threads is not None and (
            not isinstance(self.threads, int) or self.threads < 1
        ):
            issues.append(f"threads: must be a positive integer, got {self.threads!r}")
        if issues:
            raise ConfigurationError("invalid run configuration", issues=issues)

    def require_seed(self, subcommand: str) -> int:
        if self.seed is None:
            raise ConfigurationError(
                f"{subcommand} is stochastic and needs a seed",
                issues=["seed: missing (set it in the file or pass --seed)"],
            )
        return self.seed

    @classmethod
    def from_dict(cls, config: dict[str, Any]) -> "RunConfig":
        """Create a configuration from a parsed YAML tree.

        Raises:
            ConfigurationError: with every problem found across the blocks
        """
        if not isinstance(config, dict):
            raise ConfigurationError("configuration root must be a mapping")
        issues = [f"{key}: unknown key" for key in sorted(set(config) - _TOP_LEVEL)]
        if "model" not in config:
            issues.append("model: missing")

        parsed: dict[str, Any] = {}
        builders = {
            "model": lambda block: ChemostatParams.from_dict(block or {}),
            "solver": lambda block: FlowSolverConfig.from_dict(block or {}),
            **{
                name: (lambda block, name=name: _block(_BLOCKS[name], block, name))
                for name in _BLOCKS
            },
        }
        for name, build in builders.items():
            if name not in config:
                continue
            try:
                parsed[name] = build(config[name])
            except ConfigurationError as e:
                issues.extend(e.issues or [f"{name}: {e}"])
            except TypeError as e:
                issues.append(f"{name}: {e}")

        for key in ("seed", "replicas", "threads"):
            if key in config:
                parsed[key] = config[key]
        if "output_dir" in config:
            parsed["output_dir"] = Path(config["output_dir"])
        if issues:
            raise ConfigurationError("invalid configuration", issues=issues)
        return cls(**parsed)

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model.to_dict(),
            "solver": self.solver.to_dict(),
            "seed": self.seed,
            "replicas": self.replicas,
            "threads": self.threads,
            "output_dir": str(self.output_dir),
            **{name: dataclasses.asdict(getattr(self, name)) for name in _BLOCKS},
        }


def parse_config(path: Path) -> RunConfig:
    """Load and validate a YAML run configuration.

    Raises:
        ConfigurationError: missing file, YAML syntax, duplicate, unknown or
            invalid keys (all itemized in ``issues``)
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    logger.info(f"Loading configuration from {path}")
    try:
        with path.open() as f:
            tree = yaml.load(f, Loader=_UniqueKeyLoader)  # noqa: S506
    except yaml.YAMLError as e:
        raise ConfigurationError(f"cannot parse {path}: {e}") from None
    return RunConfig.from_dict(tree or {})
