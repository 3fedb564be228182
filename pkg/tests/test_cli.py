import subprocess
import sys

import numpy as np

from tribem import generate_bar_mesh, write_stl
from tribem.cli import main


def run_cli(args):
    return main(args)


def bar_args(tmp_path, resolution="coarse", extra=()):
    out = tmp_path / "results.csv"
    return [
        "--bar", f"4x4,100,{resolution}",
        "--fix", "z=0",
        "--load", "z=100:0,0,10000",
        "--E", "200000", "--nu", "0.33",
        "--out", str(out),
        *extra,
    ], out


class TestEndToEnd:
    def test_coarse_bar_run(self, tmp_path):
        args, out = bar_args(tmp_path)
        assert run_cli(args) == 0
        results = out.read_text().splitlines()
        assert results[0].startswith("#")
        assert len(results) == 1 + 12
        first = results[1].split(",")
        assert first[0] == "1" and first[1] in ("displacement", "traction")

        unknowns = (tmp_path / "results.unknowns.txt").read_text().splitlines()
        assert len(unknowns) == 36
        floats = [float(v) for v in unknowns]
        assert all(np.isfinite(floats))

        report = (tmp_path / "results.report.txt").read_text()
        assert "elements:" in report and "relative residual:" in report
        assert "rigid-body dev" in report

    def test_mesh_file_and_bc_file(self, tmp_path):
        mesh = generate_bar_mesh((1, 1), 1, "coarse")
        mesh_path = tmp_path / "box.stl"
        mesh_path.write_text(write_stl(mesh))
        bc_path = tmp_path / "cover.bc"
        lines = []
        for i in range(len(mesh)):
            zs = mesh.vertices[i, :, 2]
            if np.all(np.abs(zs) < 1e-9):
                lines.append(f"{i + 1} D 0 0 0")
            else:
                lines.append(f"{i + 1} T 0 0 1")
        bc_path.write_text("\n".join(lines) + "\n")
        out = tmp_path / "r.csv"
        code = run_cli(
            ["--mesh", str(mesh_path), "--bc", str(bc_path),
             "--E", "1000", "--nu", "0.3", "--out", str(out)]
        )
        assert code == 0
        assert out.exists()

    def test_interior_points_in_report(self, tmp_path):
        args, out = bar_args(tmp_path, extra=("--interior", "2,2,50", "--interior", "2,2,1"))
        assert run_cli(args) == 0
        report = (tmp_path / "results.report.txt").read_text()
        assert "interior displacements:" in report
        assert report.count("->") == 2

    def test_custom_output_paths(self, tmp_path):
        unknowns = tmp_path / "u.txt"
        report = tmp_path / "rep.txt"
        args, out = bar_args(
            tmp_path, extra=("--unknowns", str(unknowns), "--report", str(report))
        )
        assert run_cli(args) == 0
        assert unknowns.exists() and report.exists()

    def test_workers_flag(self, tmp_path):
        args, out = bar_args(tmp_path, extra=("--workers", "2"))
        assert run_cli(args) == 0


class TestDeterminism:
    def test_byte_identical_reruns_and_parallel_assembly(self, tmp_path):
        outputs = []
        for sub, workers in (("a", "1"), ("b", "1"), ("c", "2")):
            d = tmp_path / sub
            d.mkdir()
            out = d / "results.csv"
            code = run_cli(
                ["--bar", "4x4,100,medium", "--fix", "z=0",
                 "--load", "z=100:0,0,10000", "--E", "200000", "--nu", "0.33",
                 "--out", str(out), "--workers", workers]
            )
            assert code == 0
            outputs.append(
                (out.read_bytes(), (d / "results.unknowns.txt").read_bytes())
            )
        assert outputs[0] == outputs[1] == outputs[2]


class TestExitCodes:
    def test_missing_mesh_file(self, tmp_path, capsys):
        code = run_cli(
            ["--mesh", str(tmp_path / "nope.stl"), "--E", "1", "--nu", "0.3",
             "--out", str(tmp_path / "r.csv")]
        )
        assert code == 3
        assert "not found" in capsys.readouterr().err

    def test_malformed_stl(self, tmp_path, capsys):
        bad = tmp_path / "bad.stl"
        bad.write_text("solid x\n facet normal 0 0 0\n")
        code = run_cli(
            ["--mesh", str(bad), "--fix", "z=0", "--E", "1", "--nu", "0.3",
             "--out", str(tmp_path / "r.csv")]
        )
        assert code == 1

    def test_binary_stl(self, tmp_path):
        bad = tmp_path / "bad.stl"
        bad.write_bytes(b"\x00" * 100)
        code = run_cli(
            ["--mesh", str(bad), "--fix", "z=0", "--E", "1", "--nu", "0.3",
             "--out", str(tmp_path / "r.csv")]
        )
        assert code == 1

    def test_bad_bar_spec(self, tmp_path, capsys):
        code = run_cli(
            ["--bar", "4x4x100", "--E", "1", "--nu", "0.3",
             "--out", str(tmp_path / "r.csv")]
        )
        assert code == 1

    def test_bad_resolution(self, tmp_path):
        code = run_cli(
            ["--bar", "4x4,100,ultra", "--E", "1", "--nu", "0.3",
             "--out", str(tmp_path / "r.csv")]
        )
        assert code == 1

    def test_usage_error_is_validation(self, tmp_path, capsys):
        # argparse would exit 2; the CLI maps usage problems to 1
        code = run_cli(["--E", "1", "--nu", "0.3", "--out", str(tmp_path / "r.csv")])
        assert code == 1

    def test_invalid_material(self, tmp_path, capsys):
        args, _ = bar_args(tmp_path)
        args[args.index("--nu") + 1] = "0.7"
        assert run_cli(args) == 1

    def test_incomplete_bc_cover(self, tmp_path):
        mesh_path = tmp_path / "box.stl"
        mesh_path.write_text(write_stl(generate_bar_mesh((1, 1), 1, "coarse")))
        bc_path = tmp_path / "partial.bc"
        bc_path.write_text("1 D 0 0 0\n")
        code = run_cli(
            ["--mesh", str(mesh_path), "--bc", str(bc_path),
             "--E", "1", "--nu", "0.3", "--out", str(tmp_path / "r.csv")]
        )
        assert code == 1

    def test_singular_system_exit_2(self, tmp_path):
        from tribem.geometry import Mesh

        mesh = generate_bar_mesh((1, 1), 1, "coarse")
        fixed_idx = next(
            i for i in range(len(mesh))
            if np.all(np.abs(mesh.vertices[i, :, 2]) < 1e-12)
        )
        dup = write_stl(Mesh(list(mesh.elements) + [mesh.elements[fixed_idx]]))
        (tmp_path / "dup.stl").write_text(dup)
        code = run_cli(
            ["--mesh", str(tmp_path / "dup.stl"), "--fix", "z=0",
             "--E", "1", "--nu", "0.3", "--out", str(tmp_path / "r.csv")]
        )
        assert code == 2

    def test_unwritable_output(self, tmp_path):
        args, _ = bar_args(tmp_path)
        args[args.index("--out") + 1] = str(tmp_path / "missing_dir" / "r.csv")
        assert run_cli(args) == 3

    def test_unreachable_server(self, tmp_path):
        args, _ = bar_args(tmp_path, extra=("--server", "http://127.0.0.1:1"))
        assert run_cli(args) == 3


class TestConsoleEntry:
    def test_module_invocation_help(self):
        proc = subprocess.run(
            [sys.executable, "-m", "tribem", "--help"],
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0
        assert "--mesh" in proc.stdout and "--bar" in proc.stdout

    def test_module_invocation_run(self, tmp_path):
        out = tmp_path / "r.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "tribem", "--bar", "4x4,100,coarse",
             "--fix", "z=0", "--load", "z=100:0,0,10000",
             "--E", "200000", "--nu", "0.33", "--out", str(out)],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
        assert out.exists()
        assert "ok:" in proc.stdout
