import pytest

from ncfv.config import load_config, parse_config
from ncfv.errors import ConfigError, ParseError, ValidationError
from ncfv.registry import TESTS, get_test, list_tests


def test_minimal_config_is_fully_defaulted():
    cfg = parse_config('test = "burgers.test2"')
    t = TESTS["burgers.test2"]
    assert cfg.system == "burgers" and cfg.system_options == {"path": "viscous"}
    assert cfg.cells == t.cells[0] and cfg.t_end == t.t_end
    assert cfg.scheme.cfl == 0.5 and cfg.scheme.alpha == 1.0 and cfg.scheme.base == "godunov"
    assert cfg.boundary == "transmissive"
    assert cfg.initial == {"riemann": ((7.99, 11.01), (0.25, 0.75), 0.5)}


def test_explicit_config():
    cfg = parse_config("""
t_end = 0.15
snapshots = [0.05]
[system]
id = "msw"
[scheme]
order = 2
disrec = true
strategy = "exact"
cfl = 0.4
[grid]
domain = [-0.5, 0.5]
cells = 200
[initial]
riemann = { left = [1.0, 1.0], right = [1.5, 0.1855893974385], x0 = 0.0 }
""")
    assert cfg.scheme.name == "O2_ExactDisRec" and cfg.scheme.cfl == 0.4
    assert cfg.domain == (-0.5, 0.5) and cfg.snapshots == (0.05,)
    assert cfg.label == "msw"


def test_function_initial_data():
    cfg = parse_config('test = "burgers.smooth"')
    assert cfg.initial == {"function": "burgers.smooth"}
    assert cfg.boundary == "periodic" and cfg.nquad == 4


@pytest.mark.parametrize("text,needle", [
    ('test = "burgers.test2"\n[scheme]\ncfl = 1.5', "cfl"),
    ('t_end = 1.0\n[system]\nid = "euler"\n[grid]\ndomain=[0,1]\ncells=10\n'
     '[initial]\nfunction = "burgers.smooth"', "unknown system"),
    ('test = "nope"', "unknown test"),
    ('test = "burgers.test2"\n[grid]\ncells = 5', "cells"),
    ('test = "burgers.test2"\n[grid]\ndomain = [1.0, 0.0]', "domain"),
    ('test = "burgers.test2"\nbogus = 1', "bogus"),
    ('test = "burgers.test2"\n[initial]\nriemann = {left=[1.0,1.0], right=[1.0,-3.0], x0=0.5}',
     "admissible"),
    ('test = "burgers.test2"\n[initial]\nriemann = {left=[1.0,1.0], right=[1.0,1.0], x0=2.0}',
     "outside"),
    ('test = "burgers.test2"\nt_end = -1.0', "t_end"),
    ('test = "burgers.test2"\nsnapshots = [0.5]', "snapshot"),
    ('test = "gas.test1"\n[system]\ngamma = 0.5', "gamma"),
])
def test_validation_errors(text, needle):
    with pytest.raises(ValidationError) as info:
        parse_config(text)
    assert any(needle in p for p in info.value.problems)


def test_all_problems_are_reported_together():
    with pytest.raises(ValidationError) as info:
        parse_config('test = "burgers.test2"\n[scheme]\ncfl = 2.0\nalpha = 3.0\n[grid]\ncells = 1')
    assert len(info.value.problems) == 3


def test_parse_error_carries_location():
    with pytest.raises(ParseError) as info:
        parse_config('test = "burgers.test2"\n[scheme\n')
    assert "line 2" in str(info.value)
    assert isinstance(info.value, ConfigError)


def test_overrides_revalidate():
    cfg = parse_config('test = "burgers.test1"')
    o = cfg.with_overrides(cfl=0.3, cells=64, order=2, disrec=True, strategy="exact")
    assert (o.scheme.cfl, o.cells, o.scheme.name) == (0.3, 64, "O2_ExactDisRec")
    assert cfg.cells == 1000
    with pytest.raises(ValidationError):
        cfg.with_overrides(cfl=1.2)
    with pytest.raises(ValidationError):
        cfg.with_overrides(cells=3)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "none.toml")


def test_registry_encodes_published_data():
    assert get_test("burgers.test2").left == (7.99, 11.01)
    assert get_test("msw.test2").right == (1.5, 0.1855893974385)
    assert get_test("msw.test1").domain == (-0.5, 0.5) and get_test("msw.test1").x0 == 0.0
    assert get_test("burgers.test6").reference_cells == 10000
    ids = [t.id for t in list_tests(include_supplementary=False)]
    assert ids == [f"burgers.test{i}" for i in range(1, 7)] + \
        [f"gas.test{i}" for i in range(1, 4)] + [f"msw.test{i}" for i in range(1, 4)]
    with pytest.raises(KeyError):
        get_test("burgers.test9")
