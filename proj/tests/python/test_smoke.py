import json
import math
import os
import sys

import pytest

module_dir = os.environ.get("ACYC_MODULE_DIR")
if module_dir:
    sys.path.insert(0, module_dir)
try:
    import _acyc as acyc
except ImportError:  # pragma: no cover
    pytest.skip("compiled _acyc module not on path", allow_module_level=True)

ALPHA = (math.sqrt(5.0) - 1.0) / 2.0


def source_path(*parts):
    root = os.environ.get("ACYC_SOURCE_DIR", os.path.join(os.path.dirname(__file__), "..", ".."))
    return os.path.join(root, *parts)


def test_linear_class_matches_velocity():
    v = [1.0 / math.sqrt(3.0), math.sqrt(2.0) / math.sqrt(3.0)]
    res = acyc.linear_class(v)
    assert res["converged"]
    assert max(abs(a - b) for a, b in zip(res["value"], v)) < 1e-3


def test_flat_norms_are_exact():
    assert acyc.loop_norm([3, 4]) == 5.0
    assert acyc.stable_norm_flat([3, 4]) == 5.0


def test_leaf_class_hits_ruelle_sullivan():
    res = acyc.leaf_class(ALPHA, x0=0.1, steps=100000, tol=1e-3)
    assert res["symbolic"]["converged"]
    target = res["ruelle_sullivan"]
    err = max(abs(a - b) for a, b in zip(res["symbolic"]["value"], target))
    assert err < 1e-3
    assert "geometric" in res


def test_k_class_t3_converges():
    res = acyc.k_class_t3(ALPHA)
    assert res["converged"]
    err = max(abs(a - b) for a, b in zip(res["value"], res["ruelle_sullivan"]))
    assert err < 1e-3


def test_measure_distance_small():
    assert acyc.measure_distance(ALPHA, seed=0.1, steps=10000) < 1e-2


def test_validate_config_rejects_unknown_field():
    with pytest.raises(ValueError, match="surprise"):
        acyc.validate_config(json.dumps({
            "schemaVersion": 1,
            "subcommand": "asymptotic",
            "surprise": 1,
            "subject": {"type": "linearFlow", "velocity": [1.0, 0.5]},
        }))


def test_run_config_on_bundled_golden(tmp_path):
    with open(source_path("configs", "stable_norm_flat.json")) as fh:
        text = fh.read()
    res = acyc.run_config(text, str(tmp_path))
    assert res["exit_code"] == 0
    assert res["all_passed"]
    report = json.loads(res["report_json"])
    assert report["results"]["classes"][0]["value"] == 5.0
    assert (tmp_path / "report.json").exists()


def test_golden_manifest_shape():
    manifest = acyc.golden_manifest()
    assert len(manifest) >= 10
    names = {e["name"] for e in manifest}
    assert len(names) == len(manifest)
    assert "linear_flow" in names
    assert all(e["expected_exit"] in (0, 2) for e in manifest)
