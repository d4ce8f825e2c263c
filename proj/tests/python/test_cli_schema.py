import json

import jsonschema
import pytest

CASES = [
    (["validate", "--set", "experiment.hypothesis_samples=200"], {"hypothesis.json": "hypothesis"}),
    (["rate", "--terminal", "0.7"], {"rate.json": "rate"}),
    (["exit-rate", "--set", "experiment.delta=0.9"], {"exit_rate.json": "rate"}),
    (["simulate", "--set", "experiment.control=[1.0]"], {"remainder.json": "remainder"}),
    (
        ["mdp-sweep", "--set", "experiment.delta=0.8", "--set", "sim.eps_list=[0.2,0.12,0.08]",
         "--set", "experiment.n_samples=500"],
        {"mdp_sweep.json": "mdp_sweep"},
    ),
    (
        ["remainder-sweep", "--set", "sim.eps_list=[0.2,0.1]", "--set", "experiment.n_samples=50"],
        {"remainder_sweep.json": "decay_table"},
    ),
    (
        ["weak-conv", "--set", "sim.eps_list=[0.2,0.1]", "--set", "experiment.n_samples=50",
         "--set", "experiment.control=[1.0]"],
        {"weak_conv.json": "decay_table"},
    ),
]


@pytest.mark.parametrize("args,files", CASES, ids=[c[0][0] for c in CASES])
def test_outputs_match_schema(run_tool, schemas, args, files):
    out = run_tool(*args)
    for name, schema in files.items():
        jsonschema.validate(json.loads((out / name).read_text()), schemas[schema])
    manifest = json.loads((out / "manifest.json").read_text())
    jsonschema.validate(manifest, schemas["manifest"])
    jsonschema.validate(manifest["config"], schemas["config"])
    assert set(files) <= set(manifest["files"])


def test_limit_writes_csv_and_manifest(run_tool, schemas):
    out = run_tool("limit")
    header = (out / "limit.csv").read_text().splitlines()[0]
    assert header == "t,x1"
    jsonschema.validate(json.loads((out / "manifest.json").read_text()), schemas["manifest"])


def test_unknown_key_is_a_config_error(run_tool):
    run_tool("limit", "--set", "grid.nope=1", expect=2)


def test_example_configs_validate(schemas):
    import pathlib

    root = pathlib.Path(__file__).resolve().parents[2] / "configs"
    files = sorted(root.glob("*.json"))
    assert files
    for f in files:
        text = "\n".join(line for line in f.read_text().splitlines() if not line.lstrip().startswith("//"))
        jsonschema.validate(json.loads(text), schemas["config"])
