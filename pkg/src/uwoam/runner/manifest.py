"""Run manifest: sectioned key=value text listing every output with its sha256."""
from __future__ import annotations

import configparser
import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union


def sha256_file(path: Union[str, os.PathLike]) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    config_text: str
    states: list[dict[str, object]] = field(default_factory=list)
    versions: dict[str, str] = field(default_factory=dict)
    wall_clock: float = 0.0
    seeds: dict[str, int] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)
    files: dict[str, str] = field(default_factory=dict)  # relative posix path -> sha256

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp["run"] = {"wall_clock_s": f"{self.wall_clock:.3f}", **self.versions}
        echo = configparser.ConfigParser(interpolation=None)
        echo.read_string(self.config_text)
        for name in echo.sections():
            cp[f"config.{name}"] = dict(echo[name])
        cp["seeds"] = {k: str(v) for k, v in self.seeds.items()}
        for i, summary in enumerate(self.states):
            cp[f"state.{i:02d}"] = {k: _fmt(v) for k, v in summary.items()}
        cp["failures"] = {f"{i:04d}": msg for i, msg in enumerate(self.failures)}
        cp["files"] = dict(sorted(self.files.items()))
        lines = []
        for name in cp.sections():
            lines.append(f"[{name}]")
            lines += [f"{k} = {v}" for k, v in cp[name].items()]
            lines.append("")
        return "\n".join(lines)

    def write(self, path: Union[str, os.PathLike]) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def read(cls, path: Union[str, os.PathLike]) -> "RunManifest":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp.read(path)
        run = dict(cp["run"])
        wall = float(run.pop("wall_clock_s", "0"))
        config_lines = []
        for name in cp.sections():
            if name.startswith("config."):
                config_lines.append(f"[{name[len('config.'):]}]")
                config_lines += [f"{k} = {v}" for k, v in cp[name].items()]
                config_lines.append("")
        states = [dict(cp[n]) for n in cp.sections() if n.startswith("state.")]
        return cls("\n".join(config_lines), states, run, wall,
                   {k: int(v) for k, v in cp["seeds"].items()},
                   list(cp["failures"].values()) if cp.has_section("failures") else [],
                   dict(cp["files"]))

    def verify(self, root: Union[str, os.PathLike]) -> list[str]:
        """Files whose on-disk checksum differs from the listing (or are missing)."""
        bad = []
        for rel, digest in self.files.items():
            p = Path(root) / rel
            if not p.is_file():
                bad.append(f"missing: {rel}")
            elif sha256_file(p) != digest:
                bad.append(f"checksum mismatch: {rel}")
        return bad


def _fmt(v: object) -> str:
    return f"{v:.6g}" if isinstance(v, float) else str(v)
