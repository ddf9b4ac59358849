import json
import math
import shutil

import pytest

from gridconf.errors import DatasetParseError, ValidationError
from gridconf.grid_model import (
    Configuration,
    base_configuration,
    load_dataset,
    load_network,
    parse_network,
    resolve_dataset,
    save_network,
)
from gridconf.topology import all_nodes_traversed, is_radial

MANIFEST = {"name": "toy", "root_bus": 1, "format_version": 1}


def test_bundled_33(net33):
    assert net33.n_buses == 33
    assert net33.n_branches == 37
    assert net33.n_ties == 5
    assert math.isclose(net33.total_demand_kw / 1000, 3.71, abs_tol=0.01)


def test_bundled_69(net69):
    assert net69.n_buses == 69
    assert net69.n_branches == 73
    assert net69.n_ties == 5
    assert math.isclose(net69.total_demand_kw / 1000, 3.80, abs_tol=0.01)


def test_base_configurations(net33, net69, square):
    assert base_configuration(net33).open_edges == {33, 34, 35, 36, 37}
    assert base_configuration(net69).open_edges == {69, 70, 71, 72, 73}
    assert base_configuration(square).open_edges == {4}


@pytest.mark.parametrize("name", ["33", "69"])
def test_base_configuration_is_operable(name):
    net = load_dataset(name)
    cfg = base_configuration(net)
    assert all_nodes_traversed(net, cfg)
    assert is_radial(net, cfg)


def test_load_is_deterministic():
    assert load_dataset("33") == load_dataset("ieee33")


def test_round_trip(tmp_path, net69):
    save_network(net69, tmp_path / "copy")
    assert load_network(tmp_path / "copy") == net69


def test_data_dir_env_override(tmp_path, monkeypatch, net33):
    shutil.copytree(resolve_dataset("33"), tmp_path / "mine")
    monkeypatch.setenv("GRIDCONF_DATA_DIR", str(tmp_path))
    assert load_dataset("mine") == net33
    with pytest.raises(FileNotFoundError):
        load_dataset("33")


def test_no_tie_rejected():
    with pytest.raises(ValidationError, match="tie"):
        parse_network("id,demand_kw\n1,0\n2,5\n", "id,from,to,r_ohm,x_ohm,is_tie\n1,1,2,0.1,0.1,0\n", MANIFEST)


def test_parse_error_has_line_number():
    branches = "id,from,to,r_ohm,x_ohm,is_tie\n1,1,2,0.1,0.1,0\n2,2,3,abc,0.1,0\n"
    with pytest.raises(DatasetParseError) as exc:
        parse_network("id,demand_kw\n1,0\n2,5\n3,5\n", branches, MANIFEST)
    assert exc.value.line == 3


def test_bad_header():
    with pytest.raises(DatasetParseError) as exc:
        parse_network("bus,demand\n1,0\n", "", MANIFEST)
    assert exc.value.line == 1


def test_duplicate_bus_rejected():
    with pytest.raises(ValidationError, match="duplicate"):
        parse_network("id,demand_kw\n1,0\n1,5\n", "id,from,to,r_ohm,x_ohm,is_tie\n1,1,2,0.1,0.1,0\n", MANIFEST)


def test_disconnected_rejected():
    buses = "id,demand_kw\n1,0\n2,1\n3,1\n4,1\n"
    branches = ("id,from,to,r_ohm,x_ohm,is_tie\n1,1,2,0.1,0.1,0\n2,3,4,0.1,0.1,0\n"
                "3,1,2,0.1,0.1,0\n4,3,4,0.1,0.1,1\n")
    with pytest.raises(ValidationError, match="disconnected"):
        parse_network(buses, branches, MANIFEST)


def test_bad_manifest_version():
    with pytest.raises(ValidationError):
        parse_network("id,demand_kw\n1,0\n", "id,from,to,r_ohm,x_ohm,is_tie\n", dict(MANIFEST, format_version=9))


def test_configuration_validation(net33):
    with pytest.raises(ValidationError):
        Configuration.of(net33, [1, 1, 2, 3, 4])
    with pytest.raises(ValidationError):
        Configuration.of(net33, [99])
    cfg = Configuration.of(net33, [7, 14, 26, 33, 34])
    assert len(cfg.closed_edges(net33)) == 37 - 5


def test_manifest_files_parse():
    for name in ("33", "69"):
        data = json.loads((resolve_dataset(name) / "manifest.json").read_text())
        assert data["format_version"] == 1 and data["root_bus"] == 1
