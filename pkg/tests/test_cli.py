import json
from pathlib import Path

import numpy as np
import pytest

from intreg.cli import certificate_from_dict, certificate_to_dict, main

TRANSPORT_DOC = {
    "n": 1, "ell": 1, "m": 1,
    "lambda0": {"constant": [1.0]},
    "lambda1": {"constant": [[0.0]]},
    "K": [[0.0]], "B": [[1.0]], "L1": [[0.0]], "L2": [[1.0]],
    "scenario": {"w_b": [0.0], "w_y": [0.0], "y_ref": [1.0]},
}


@pytest.fixture
def transport_file(tmp_path):
    path = tmp_path / "transport.json"
    path.write_text(json.dumps(TRANSPORT_DOC))
    return path


class TestDesignCommand:
    def test_design_writes_certificate_and_manifest(self, tmp_path, transport_file, capsys):
        out = tmp_path / "cert.json"
        rc = main(["design", "--system", str(transport_file), "--mu", "1.0",
                   "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["ki_star"] == pytest.approx(np.exp(-0.5), rel=1e-8)
        manifest = json.loads((tmp_path / "run_manifest.json").read_text())
        assert manifest["command"] == "design"
        for key in ("mu", "c", "ki_star", "p", "mu_e"):
            assert key in manifest["derived"]

    def test_missing_system_exits_one(self, tmp_path):
        out = tmp_path / "cert.json"
        rc = main(["design", "--system", str(tmp_path / "absent.json"),
                   "--out", str(out)])
        assert rc == 1
        assert not out.exists()

    def test_certification_failure_exits_two(self, tmp_path):
        doc = dict(TRANSPORT_DOC)
        doc = json.loads(json.dumps(TRANSPORT_DOC))
        doc["n"] = 2
        doc["ell"] = 1
        doc["m"] = 2
        doc["lambda0"] = {"constant": [1.0, -1.0]}
        doc["lambda1"] = {"constant": [[0.0, 0.0], [0.0, 0.0]]}
        doc["K"] = [[0.0, 1.5], [1.5, 0.0]]
        doc["B"] = [[1.0, 0.0], [0.0, 1.0]]
        doc["L1"] = [[0.5, 0.0], [0.0, -0.5]]
        doc["L2"] = [[0.0, 0.5], [0.5, 0.0]]
        del doc["scenario"]
        path = tmp_path / "strong_reflection.json"
        path.write_text(json.dumps(doc))
        rc = main(["design", "--system", str(path), "--out", str(tmp_path / "c.json")])
        assert rc == 2


class TestSimulateAndVerify:
    def test_round_trip(self, tmp_path, transport_file):
        cert_path = tmp_path / "cert.json"
        assert main(["design", "--system", str(transport_file), "--mu", "1.0",
                     "--out", str(cert_path)]) == 0
        traj_path = tmp_path / "traj.csv"
        assert main(["simulate", "--system", str(transport_file),
                     "--cert", str(cert_path), "--T", "30", "--grid", "100",
                     "--out", str(traj_path)]) == 0
        lines = traj_path.read_text().splitlines()
        assert lines[0] == "t,y_1,z_1,norm_phi,V,Ve"
        last = [float(v) for v in lines[-1].split(",")]
        assert abs(last[1] - 1.0) <= 1e-2   # y tracks the reference
        assert main(["verify", "--system", str(transport_file),
                     "--cert", str(cert_path), "--out-dir", str(tmp_path)]) == 0

    def test_verify_catches_tampered_certificate(self, tmp_path, transport_file, capsys):
        cert_path = tmp_path / "cert.json"
        main(["design", "--system", str(transport_file), "--mu", "1.0",
              "--out", str(cert_path)])
        doc = json.loads(cert_path.read_text())
        doc["ki_star"] = 5.0
        cert_path.write_text(json.dumps(doc))
        rc = main(["verify", "--system", str(transport_file),
                   "--cert", str(cert_path), "--out-dir", str(tmp_path)])
        assert rc == 2
        assert "FAIL" in capsys.readouterr().out

    def test_unstable_gain_override_exits_three(self, tmp_path, transport_file):
        cert_path = tmp_path / "cert.json"
        main(["design", "--system", str(transport_file), "--mu", "1.0",
              "--out", str(cert_path)])
        with np.errstate(all="ignore"):
            rc = main(["simulate", "--system", str(transport_file),
                       "--cert", str(cert_path), "--T", "30", "--grid", "100",
                       "--ki", "1e15", "--out", str(tmp_path / "boom.csv")])
        assert rc == 3
        assert not (tmp_path / "boom.csv").exists()

    def test_certificate_serialization_round_trip(self, transport_cert):
        doc = certificate_to_dict(transport_cert)
        back = certificate_from_dict(json.loads(json.dumps(doc)))
        assert back.ki == pytest.approx(transport_cert.ki)
        assert back.ki_star == pytest.approx(transport_cert.ki_star)
        np.testing.assert_allclose(back.Ki, transport_cert.Ki)
        np.testing.assert_allclose(back.iss.weight.diag_at(np.array([0.3])),
                                   transport_cert.iss.weight.diag_at(np.array([0.3])))


class TestForwardCommand:
    def test_forward_from_csv(self, tmp_path):
        np.savetxt(tmp_path / "A.csv", [[-1.0, 1.0], [0.0, -2.0]], delimiter=",")
        np.savetxt(tmp_path / "B.csv", [[1.0], [1.0]], delimiter=",")
        np.savetxt(tmp_path / "C.csv", [[1.0, 0.0]], delimiter=",")
        out = tmp_path / "fwd.json"
        rc = main(["forward", "--A", str(tmp_path / "A.csv"),
                   "--B", str(tmp_path / "B.csv"), "--C", str(tmp_path / "C.csv"),
                   "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["check"]["passed"] is True
        assert doc["ki_star"] > 0

    def test_unstable_matrix_exits_two(self, tmp_path):
        np.savetxt(tmp_path / "A.csv", [[1.0]], delimiter=",")
        np.savetxt(tmp_path / "B.csv", [[1.0]], delimiter=",")
        np.savetxt(tmp_path / "C.csv", [[1.0]], delimiter=",")
        rc = main(["forward", "--A", str(tmp_path / "A.csv"),
                   "--B", str(tmp_path / "B.csv"), "--C", str(tmp_path / "C.csv"),
                   "--out", str(tmp_path / "o.json")])
        assert rc == 2


class TestReproduce:
    def test_transport_prints_peak_gain(self, tmp_path, capsys):
        rc = main(["reproduce", "transport", "--out-dir", str(tmp_path / "r")])
        assert rc == 0
        out = capsys.readouterr().out
        line = next(l for l in out.splitlines() if l.startswith("mu = 1 "))
        value = float(line.split("=")[-1])
        assert abs(value - 0.606531) <= 1e-6
        assert (tmp_path / "r" / "transport_trajectory.csv").exists()
        assert (tmp_path / "r" / "transport_gain_sweep.csv").exists()

    def test_saintvenant_artifacts(self, tmp_path, capsys):
        rc = main(["reproduce", "saintvenant", "--out-dir", str(tmp_path / "sv")])
        assert rc == 0
        csv = (tmp_path / "sv" / "saintvenant_trajectory.csv").read_text().splitlines()
        assert csv[0] == "t,y_1,y_2,z_1,z_2,norm_phi,V,Ve"
        final = [float(v) for v in csv[-1].split(",")]
        assert abs(final[1] - 1.0) <= 5e-2 and abs(final[2] - 0.5) <= 5e-2

    def test_heat_reduced_resolution(self, tmp_path, capsys):
        rc = main(["reproduce", "heat", "--out-dir", str(tmp_path / "h"),
                   "--grid", "500", "--T", "500"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "K_i" in out and "ki_star" in out
        csv = (tmp_path / "h" / "heat_trajectory.csv").read_text().splitlines()
        assert csv[0] == "t,y1,y2,y3,z1,z2,z3,V,Ve"

    def test_repeated_runs_byte_identical(self, tmp_path, capsys):
        for d in ("a", "b"):
            assert main(["reproduce", "transport", "--out-dir", str(tmp_path / d)]) == 0
        for name in ("transport_trajectory.csv", "transport_gain_sweep.csv",
                     "run_manifest.json"):
            assert ((tmp_path / "a" / name).read_bytes()
                    == (tmp_path / "b" / name).read_bytes())
