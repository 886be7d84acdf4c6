"""
config module
Run configuration shared by every CLI subcommand, from flags or a JSON file.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from oscillation_lab.errors import DescriptorError

KINDS = ("Omega", "Omega_star", "omega")


@dataclass
class RunConfig:
    """
    Inputs, numeric knobs and output locations of one command run.

    :ivar space: Path of the instance document.
    :vartype space: str or None
    :ivar subsets: Subset names; ``hausdorff`` takes two.
    :vartype subsets: list[str]
    :ivar depth: Profile depth N, >= 1.
    :vartype depth: int
    :ivar tol: Convergence tolerance, >= 0.
    :vartype tol: float
    :ivar delta_grid: Depth J of the delta grid; None picks the adequate one.
    :vartype delta_grid: int or None
    :ivar jobs: Worker threads.
    :vartype jobs: int
    """

    space: str | None = None
    subsets: list[str] = field(default_factory=list)
    function: str = "f"
    sequence: str | None = None
    set_sequence: str | None = None
    point: int | None = None
    kinds: list[str] = field(default_factory=lambda: ["Omega"])
    depth: int = 20
    eps: str | None = None
    tol: float = 0.05
    delta_grid: int | None = None
    delta: float | None = None
    separation: float | None = None
    k_min: int = 8
    k_max: int = 64
    cap: float | None = None
    out: str | None = None
    jobs: int = 1
    archive: str | None = None
    ledger: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        :raises DescriptorError: On an out-of-range knob, with its field name.
        """
        if not isinstance(self.depth, int) or self.depth < 1:
            raise DescriptorError(f"must be an integer >= 1, got {self.depth!r}", path="depth")
        if not isinstance(self.tol, (int, float)) or self.tol < 0:
            raise DescriptorError(f"must be >= 0, got {self.tol!r}", path="tol")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise DescriptorError(f"must be an integer >= 1, got {self.jobs!r}", path="jobs")
        if self.delta_grid is not None and (not isinstance(self.delta_grid, int) or self.delta_grid < 0):
            raise DescriptorError(f"must be an integer >= 0, got {self.delta_grid!r}", path="delta_grid")
        unknown = [k for k in self.kinds if k not in KINDS]
        if unknown:
            raise DescriptorError(f"unknown profile kinds {unknown}; known: {list(KINDS)}", path="kinds")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        """
        :raises DescriptorError: On keys RunConfig does not know.
        """
        if not isinstance(data, dict):
            raise DescriptorError("run configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise DescriptorError(f"unknown configuration keys {unknown}")
        return cls(**data)

    @classmethod
    def from_file(cls, filepath: str, overrides: dict | None = None) -> "RunConfig":
        """
        Load a JSON configuration file; explicit flags in ``overrides`` win.

        :param filepath: Path of the JSON file.
        :type filepath: str
        :param overrides: Values set on the command line.
        :type overrides: dict or None
        :rtype: RunConfig
        :raises DescriptorError: On unreadable or malformed files.
        """
        path = Path(filepath)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise DescriptorError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DescriptorError(f"invalid JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise DescriptorError("run configuration must be a JSON object")
        return cls.from_dict({**data, **(overrides or {})})

    def to_dict(self) -> dict:
        return asdict(self)
