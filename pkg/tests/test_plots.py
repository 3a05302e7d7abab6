import json

import matplotlib
import numpy as np
import pytest

matplotlib.use("Agg")

from rcacpilot import cli
from rcacpilot.harness import ScenarioConfig, TELEMETRY_COLUMNS, run_scenario
from rcacpilot.plots import (FIGURE_KINDS, FigureSpec, load_figure_spec,
                             render, standard_figures)


@pytest.fixture(scope="module")
def short_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("plotdata")
    config = ScenarioConfig(mode="fixed", t_max=8.0, out=str(out),
                            name="plotrun")
    _, path = run_scenario(config)
    return path


@pytest.fixture()
def empty_log(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text(",".join(TELEMETRY_COLUMNS) + "\n")
    return path


class TestRender:
    @pytest.mark.parametrize("kind", FIGURE_KINDS)
    def test_every_kind_renders(self, kind, short_run, tmp_path):
        spec = FigureSpec(kind=kind, inputs=[(str(short_run), "run")],
                          out=str(tmp_path / f"{kind}.png"))
        render(spec)
        assert (tmp_path / f"{kind}.png").stat().st_size > 0

    def test_trajectory_series_structure(self, short_run, tmp_path):
        spec = FigureSpec(
            kind="trajectory",
            inputs=[(str(short_run), "a"), (str(short_run), "b")],
            out=str(tmp_path / "traj.png"))
        fig = render(spec)
        lines = fig.axes[0].get_lines()
        assert sum(ln.get_linestyle() == "--" for ln in lines) == 1
        assert sum(ln.get_linestyle() == "-" for ln in lines) == 2

    def test_sweep_labels_every_input(self, short_run, tmp_path):
        inputs = [(str(short_run), f"alpha_p={v}") for v in (0.1, 0.5, 1, 2)]
        spec = FigureSpec(kind="sweep", inputs=inputs,
                          out=str(tmp_path / "sweep4.png"))
        fig = render(spec)
        labels = [ln.get_label() for ln in fig.axes[0].get_lines()]
        assert labels == ["reference", "alpha_p=0.1", "alpha_p=0.5",
                          "alpha_p=1", "alpha_p=2"]

    def test_empty_log_renders(self, empty_log, tmp_path):
        spec = FigureSpec(kind="gains_Pr", inputs=[(str(empty_log), "none")],
                          out=str(tmp_path / "empty.png"))
        render(spec)
        assert (tmp_path / "empty.png").stat().st_size > 0

    def test_missing_column_named_in_error(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,x\n0.0,1.0\n")
        spec = FigureSpec(kind="trajectory", inputs=[(str(path), "bad")],
                          out=str(tmp_path / "bad.png"))
        with pytest.raises(ValueError, match="'y'"):
            render(spec)

    def test_unknown_kind_rejected(self, short_run, tmp_path):
        spec = FigureSpec(kind="pie_chart", inputs=[(str(short_run), "x")],
                          out=str(tmp_path / "x.png"))
        with pytest.raises(ValueError):
            render(spec)

    def test_no_inputs_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            render(FigureSpec(kind="trajectory", inputs=[],
                              out=str(tmp_path / "x.png")))

    def test_gain_panel_has_stock_reference_lines(self, short_run, tmp_path):
        spec = FigureSpec(kind="gains_Pr", inputs=[(str(short_run), "run")],
                          out=str(tmp_path / "gp.png"))
        fig = render(spec)
        dashed = [ln for ln in fig.axes[0].get_lines()
                  if ln.get_linestyle() == "--"]
        assert len(dashed) == 3  # one stock reference per axis

    def test_identical_inputs_identical_pixels(self, short_run, tmp_path):
        buffers = []
        for name in ("p1.png", "p2.png"):
            spec = FigureSpec(kind="yaw_compare",
                              inputs=[(str(short_run), "run")],
                              out=str(tmp_path / name))
            fig = render(spec)
            fig.canvas.draw()
            buffers.append(np.asarray(fig.canvas.buffer_rgba()).copy())
        assert np.array_equal(buffers[0], buffers[1])


class TestSpecFilesAndCli:
    def test_load_figure_spec(self, short_run, tmp_path):
        payload = {"kind": "sweep",
                   "inputs": [{"path": str(short_run), "label": "baseline"}],
                   "out": str(tmp_path / "s.png")}
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(payload))
        spec = load_figure_spec(spec_path)
        assert spec.kind == "sweep"
        assert spec.inputs == [(str(short_run), "baseline")]

    def test_malformed_spec_rejected(self, tmp_path):
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps({"kind": "sweep"}))
        with pytest.raises(ValueError):
            load_figure_spec(spec_path)

    def test_render_cli_with_spec(self, short_run, tmp_path, capsys):
        payload = {"kind": "trajectory",
                   "inputs": [{"path": str(short_run)}],
                   "out": str(tmp_path / "cli.png")}
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(payload))
        assert cli.main(["render", "--spec", str(spec_path)]) == 0
        assert (tmp_path / "cli.png").exists()

    def test_render_cli_with_shortcut_flags(self, short_run, tmp_path):
        out = tmp_path / "short.png"
        code = cli.main(["render", "--kind", "states_att",
                         "--in", str(short_run), "--labels", "baseline",
                         "--out", str(out)])
        assert code == 0
        assert out.exists()

    def test_render_cli_needs_arguments(self, capsys):
        assert cli.main(["render"]) == 1

    def test_run_cli_with_figures(self, tmp_path):
        code = cli.main(["run", "--mode", "fixed", "--t-max", "5",
                         "--out", str(tmp_path), "--name", "figrun",
                         "--figures"])
        assert code == 0
        assert (tmp_path / "trajectory.png").exists()
        assert (tmp_path / "gains_PIDw.png").exists()

    def test_standard_figures_list(self, short_run, tmp_path):
        written = standard_figures([short_run], tmp_path)
        assert len(written) == 7
        assert all(p.exists() for p in written)
