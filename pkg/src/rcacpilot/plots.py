"""Batch figure rendering from telemetry CSVs.

Every figure is built from one or more telemetry files produced by the
harness (plus the JSON sidecar for stock-gain reference lines) and written
to an image file; nothing here mutates its inputs. Figure kinds:

    trajectory   top-down and 3-D flight paths, dashed reference
    states_pos   position components vs time with setpoints
    states_att   attitude components vs time with setpoints
    gains_Pr     position-loop gains (stock references dashed)
    gains_PIv    velocity-loop PI gains
    gains_Pq     attitude-loop gains (stock references dashed)
    gains_PIDw   rate-loop PID+FF gains
    sweep        top-down paths of several runs in one panel
    yaw_compare  yaw tracking of several runs in one panel
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .harness import read_telemetry  # noqa: E402

FIGURE_KINDS = ("trajectory", "states_pos", "states_att", "gains_Pr",
                "gains_PIv", "gains_Pq", "gains_PIDw", "sweep", "yaw_compare")

_BASE_COLUMNS = ("t", "x", "y", "z", "phase")

_REQUIRED: Dict[str, Tuple[str, ...]] = {
    "trajectory": _BASE_COLUMNS + ("x_sp", "y_sp", "z_sp"),
    "states_pos": _BASE_COLUMNS + ("x_sp", "y_sp", "z_sp"),
    "states_att": ("t", "phi", "theta", "psi", "phi_sp", "theta_sp", "psi_sp"),
    "gains_Pr": ("t", "g_pos_x", "g_pos_y", "g_pos_z"),
    "gains_PIv": ("t", "g_vel_x_p", "g_vel_x_i", "g_vel_y_p", "g_vel_y_i",
                  "g_vel_z_p", "g_vel_z_i"),
    "gains_Pq": ("t", "g_att_roll", "g_att_pitch", "g_att_yaw"),
    "gains_PIDw": ("t", "g_rate_roll_p", "g_rate_roll_i", "g_rate_roll_d",
                   "g_rate_roll_ff", "g_rate_pitch_p", "g_rate_pitch_i",
                   "g_rate_pitch_d", "g_rate_pitch_ff", "g_rate_yaw_p",
                   "g_rate_yaw_i", "g_rate_yaw_d", "g_rate_yaw_ff"),
    "sweep": _BASE_COLUMNS + ("x_sp", "y_sp"),
    "yaw_compare": ("t", "psi", "psi_sp"),
}

_GAIN_PANELS: Dict[str, List[Tuple[str, List[str]]]] = {
    "gains_Pr": [("position P gains", ["g_pos_x", "g_pos_y", "g_pos_z"])],
    "gains_PIv": [("velocity P gains", ["g_vel_x_p", "g_vel_y_p", "g_vel_z_p"]),
                  ("velocity I gains", ["g_vel_x_i", "g_vel_y_i", "g_vel_z_i"])],
    "gains_Pq": [("attitude P gains",
                  ["g_att_roll", "g_att_pitch", "g_att_yaw"])],
    "gains_PIDw": [("rate P gains",
                    ["g_rate_roll_p", "g_rate_pitch_p", "g_rate_yaw_p"]),
                   ("rate I gains",
                    ["g_rate_roll_i", "g_rate_pitch_i", "g_rate_yaw_i"]),
                   ("rate D gains",
                    ["g_rate_roll_d", "g_rate_pitch_d", "g_rate_yaw_d"]),
                   ("rate FF gains",
                    ["g_rate_roll_ff", "g_rate_pitch_ff", "g_rate_yaw_ff"])],
}


@dataclass
class FigureSpec:
    kind: str
    inputs: List[Tuple[str, str]]   # (telemetry path, display label)
    out: str

    def validate(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind '{self.kind}'")
        if not self.inputs:
            raise ValueError("figure spec needs at least one input file")


def load_figure_spec(path) -> FigureSpec:
    """Figure spec from JSON: {kind, inputs: [{path, label}], out}."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        inputs = [(item["path"], item.get("label", Path(item["path"]).stem))
                  for item in raw["inputs"]]
        spec = FigureSpec(kind=raw["kind"], inputs=inputs, out=raw["out"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed figure spec: {exc}") from None
    spec.validate()
    return spec


def _load_inputs(spec: FigureSpec):
    required = _REQUIRED[spec.kind]
    loaded = []
    for path, label in spec.inputs:
        data = read_telemetry(path)
        for column in required:
            if column not in data:
                raise ValueError(
                    f"{path}: telemetry is missing column '{column}' "
                    f"required by figure kind '{spec.kind}'")
        arrays = {name: np.asarray(values) for name, values in data.items()}
        loaded.append((arrays, label, path))
    return loaded


def _stock_reference(path) -> Dict[str, float]:
    sidecar = Path(path).with_suffix(".meta.json")
    if not sidecar.exists():
        return {}
    with open(sidecar, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    return meta.get("stock_gains_effective", {})


def _render_trajectory(spec, loaded):
    fig = plt.figure(figsize=(11, 5))
    top = fig.add_subplot(1, 2, 1)
    three_d = fig.add_subplot(1, 2, 2, projection="3d")

    ref = loaded[0][0]
    top.plot(ref["x_sp"], ref["y_sp"], "k--", label="reference")
    for arrays, label, _ in loaded:
        top.plot(arrays["x"], arrays["y"], "-", label=label)
    top.set_xlabel("x north, m")
    top.set_ylabel("y east, m")
    top.set_title("top-down path")
    top.axis("equal")
    top.grid(True)
    top.legend(loc="best")

    three_d.plot(ref["x_sp"], ref["y_sp"], -ref["z_sp"], "k--")
    for arrays, label, _ in loaded:
        three_d.plot(arrays["x"], arrays["y"], -arrays["z"], label=label)
    three_d.set_xlabel("x, m")
    three_d.set_ylabel("y, m")
    three_d.set_zlabel("altitude, m")
    return fig


def _render_states(spec, loaded, names, sp_names, labels, title):
    fig, axes = plt.subplots(len(names), 1, figsize=(9, 2.6 * len(names)),
                             sharex=True)
    ref = loaded[0][0]
    for ax, name, sp, ylabel in zip(axes, names, sp_names, labels):
        ax.plot(ref["t"], ref[sp], "k--", label="setpoint")
        for arrays, label, _ in loaded:
            ax.plot(arrays["t"], arrays[name], label=label)
        ax.set_ylabel(ylabel)
        ax.grid(True)
    axes[0].set_title(title)
    axes[0].legend(loc="best")
    axes[-1].set_xlabel("time, s")
    return fig


def _render_gains(spec, loaded):
    panels = _GAIN_PANELS[spec.kind]
    fig, axes = plt.subplots(len(panels), 1,
                             figsize=(9, 2.8 * len(panels)), sharex=True)
    if len(panels) == 1:
        axes = [axes]
    stock = _stock_reference(loaded[0][2])
    for ax, (title, columns) in zip(axes, panels):
        for column in columns:
            for arrays, label, _ in loaded:
                series_label = column[2:] if len(loaded) == 1 \
                    else f"{column[2:]} ({label})"
                ax.plot(arrays["t"], arrays[column], label=series_label)
            if column in stock:
                ax.axhline(stock[column], color="0.3", linestyle="--",
                           linewidth=0.9)
        ax.set_title(title)
        ax.grid(True)
        ax.legend(loc="best", fontsize=8)
    axes[-1].set_xlabel("time, s")
    return fig


def _render_sweep(spec, loaded):
    fig, ax = plt.subplots(figsize=(7, 6))
    ref = loaded[0][0]
    ax.plot(ref["x_sp"], ref["y_sp"], "k--", label="reference")
    for arrays, label, _ in loaded:
        ax.plot(arrays["x"], arrays["y"], label=label)
    ax.set_xlabel("x north, m")
    ax.set_ylabel("y east, m")
    ax.set_title("closed-loop paths")
    ax.axis("equal")
    ax.grid(True)
    ax.legend(loc="best")
    return fig


def _render_yaw_compare(spec, loaded):
    fig, ax = plt.subplots(figsize=(9, 4))
    ref = loaded[0][0]
    ax.plot(ref["t"], ref["psi_sp"], "k--", label="setpoint")
    for arrays, label, _ in loaded:
        ax.plot(arrays["t"], arrays["psi"], label=label)
    ax.set_xlabel("time, s")
    ax.set_ylabel("yaw, rad")
    ax.set_title("yaw tracking")
    ax.grid(True)
    ax.legend(loc="best")
    return fig


def render(spec: FigureSpec):
    """Render one figure and write it to spec.out; returns the Figure."""
    spec.validate()
    loaded = _load_inputs(spec)
    if spec.kind == "trajectory":
        fig = _render_trajectory(spec, loaded)
    elif spec.kind == "states_pos":
        fig = _render_states(
            spec, loaded, ("x", "y", "z"), ("x_sp", "y_sp", "z_sp"),
            ("x, m", "y, m", "z, m"), "translational response")
    elif spec.kind == "states_att":
        fig = _render_states(
            spec, loaded, ("phi", "theta", "psi"),
            ("phi_sp", "theta_sp", "psi_sp"),
            ("roll, rad", "pitch, rad", "yaw, rad"), "rotational response")
    elif spec.kind in _GAIN_PANELS:
        fig = _render_gains(spec, loaded)
    elif spec.kind == "sweep":
        fig = _render_sweep(spec, loaded)
    else:
        fig = _render_yaw_compare(spec, loaded)
    fig.tight_layout()
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return fig


def standard_figures(telemetry_paths: Sequence, out_dir) -> List[Path]:
    """The default report set rendered next to a run's CSV output."""
    out_dir = Path(out_dir)
    inputs = [(str(p), Path(p).stem) for p in telemetry_paths]
    written = []
    for kind in ("trajectory", "states_pos", "states_att",
                 "gains_Pr", "gains_PIv", "gains_Pq", "gains_PIDw"):
        spec = FigureSpec(kind=kind, inputs=list(inputs),
                          out=str(out_dir / f"{kind}.png"))
        render(spec)
        written.append(Path(spec.out))
    return written
