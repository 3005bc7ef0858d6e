import io
import json

import pytest

from toeplitz_fr.cli import run


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    report = json.loads(out.getvalue()) if out.getvalue() else None
    return code, report, err.getvalue()


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


def cplx(*values):
    return [[complex(v).real, complex(v).imag] for v in values]


TWIST = {
    "n": 2,
    "codomain": "dense",
    "images": [
        [[[0, 0], [2, 0]], [[0, 0], [0, 0]]],
        [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
        [[[0, 0], [0, 0]], [[2, 0], [0, 0]]],
    ],
}


def test_report_shape(tmp_path):
    code, rep, _ = invoke("fr-nonneg", "--input", write(tmp_path, "f.json", {"n": 2, "coeffs": cplx(1, 2, 1)}))
    assert code == 0
    assert set(rep) == {"command", "inputs_hash", "outcome", "tolerances", "seed", "version"}
    assert rep["outcome"]["nonneg"] and len(rep["inputs_hash"]) == 64


def test_hash_is_deterministic(tmp_path):
    path = write(tmp_path, "f.json", {"n": 2, "coeffs": cplx(1, 2, 1)})
    assert invoke("fr-nonneg", "--input", path)[1] == invoke("fr-nonneg", "--input", path)[1]


def test_fr_commands(tmp_path):
    good = write(tmp_path, "f.json", {"n": 2, "coeffs": cplx(1, 2, 1)})
    bad = write(tmp_path, "g.json", {"n": 2, "coeffs": cplx(1, 1, 1)})
    code, rep, _ = invoke("fr-factor", "--input", good)
    assert code == 0 and rep["outcome"]["factored"]
    assert invoke("fr-nonneg", "--input", bad)[0] == 1
    assert invoke("fr-factor", "--input", bad)[0] == 1


def test_psd_and_conv_hull(tmp_path):
    code, rep, _ = invoke("psd", "--input", write(tmp_path, "m.json", [cplx(1, 2), cplx(2, 1)]))
    assert code == 1 and abs(rep["outcome"]["min_eigenvalue"] + 1) < 1e-12
    code, rep, _ = invoke("conv-hull", "--input", write(tmp_path, "x.json", {"xi": cplx(1, -1)}))
    assert code == 1 and rep["outcome"]["min_eigenvalue"] <= -0.5
    assert invoke("conv-hull", "--input", write(tmp_path, "y.json", {"xi": cplx(0, 0)}))[0] == 0


def test_toeplitz_commands(tmp_path):
    two = write(tmp_path, "t.json", {"n": 2, "coeffs": cplx(0, 2, 0)})
    code, rep, _ = invoke("carath", "--input", two)
    assert code == 0 and len(rep["outcome"]["decomposition"]["atoms"]) == 2
    code, rep, _ = invoke("extend-toeplitz", "--m", "4", "--input", two)
    assert code == 0 and rep["outcome"]["corner_residual"] < 1e-8
    code, rep, _ = invoke("truncate", "--n", "1", "--input", two)
    assert code == 0 and rep["outcome"]["toeplitz"]["n"] == 1
    code, rep, _ = invoke("pair", "--toeplitz", two, "--trigpoly", write(tmp_path, "f.json", {"n": 2, "coeffs": cplx(1, 2, 1)}))
    assert code == 0 and abs(complex(*rep["outcome"]["value"]) - 4) < 1e-12


def test_map_commands(tmp_path):
    path = write(tmp_path, "map.json", TWIST)
    code, rep, _ = invoke("cp-check", "--map", path)
    assert code == 1 and rep["outcome"]["min_eigenvalue"] <= -0.5
    assert invoke("pos-check", "--map", path)[0] == 1


def test_block_commands(tmp_path):
    eye = [cplx(1, 0), cplx(0, 1)]
    zero = [cplx(0, 0), cplx(0, 0)]
    doc = {"n": 2, "m": 2, "blocks": [zero, eye, zero]}
    code, rep, _ = invoke("gurvits", "--input", write(tmp_path, "x.json", doc))
    assert code == 0 and rep["outcome"]["verified"]
    code, _, _ = invoke("rn-decompose", "--n", "3")
    assert code == 0
    code, rep, _ = invoke("corner-test", "--m", "3", "--zeta", "1", "0")
    assert code == 0 and rep["outcome"]["feasible"]
    code, rep, _ = invoke("corner-test", "--m", "3", "--zeta", "0", "1")
    assert code == 1 and "farkas" in rep["outcome"]


@pytest.fixture(scope="module")
def certificate(tmp_path_factory):
    path = tmp_path_factory.mktemp("cert") / "cert.json"
    code = run(["witness", "--universal", "2", "--output", str(path)], stdout=io.StringIO(), stderr=io.StringIO())
    return code, str(path)


def test_witness_certificate(certificate):
    code, path = certificate
    assert code == 1
    with open(path) as fh:
        rep = json.load(fh)
    assert rep["outcome"]["status"] == "entangled" and rep["outcome"]["certificate"]["valid"]
    code, rep, _ = invoke("witness", "--verify", path)
    assert code == 1 and rep["outcome"]["verification"]["valid"]


def test_witness_tampered_certificate(certificate, tmp_path):
    with open(certificate[1]) as fh:
        rep = json.load(fh)
    cert = rep["outcome"]["certificate"]
    cert["target"][0][0] = [3.0, 0.0]
    assert invoke("witness", "--verify", write(tmp_path, "bad.json", cert))[0] == 65


def test_usage_errors(tmp_path):
    assert invoke()[0] == 64
    assert invoke("no-such-command")[0] == 64
    assert invoke("truncate", "--input", "x.json")[0] == 64  # --n missing
    assert invoke("fr-nonneg", "--input", str(tmp_path / "missing.json"))[0] == 64


def test_format_errors(tmp_path):
    assert invoke("fr-nonneg", "--input", write(tmp_path, "bad.json", "{bad"))[0] == 65
    assert invoke("fr-nonneg", "--input", write(tmp_path, "c.json", {"n": 2, "coeffs": cplx(1, 2)}))[0] == 65
    assert invoke("fr-nonneg", "--input", write(tmp_path, "d.json", {"n": 2, "coeffs": cplx(1j, 2, 1)}))[0] == 65


def test_output_flag(tmp_path):
    out = tmp_path / "out.json"
    code, rep, _ = invoke("rn-decompose", "--n", "2", "--output", str(out))
    assert code == 0 and rep is None
    assert json.loads(out.read_text())["command"] == "rn-decompose"
