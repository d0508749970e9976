import pytest

from wintgen.config import DEFAULT_OPTIONS, dumps_config, load_config, parse_config
from wintgen.errors import MissingSection, ParseError, UnknownKey, ValidationError

MINIMAL = """
[immersion]
variables = ["u", "v", "s"]
components = ["u", "v", "u^2 - v^2", "2*u*v", "s"]

[domain]
min = [-1.0, -1.0, -1.0]
max = [1.0, 1.0, 1.0]
grid = [5, 5, 5]
"""


def test_defaults_applied():
    cfg = parse_config(MINIMAL)
    assert cfg.options == DEFAULT_OPTIONS
    assert (cfg.options["jet_order"], cfg.fd_step, cfg.tol_exact, cfg.ambient_c) == (4, 1e-3, 1e-8, 0.0)
    assert cfg.grid_points().shape == (125, 3)


def test_typo_reports_key_and_line():
    text = MINIMAL + "\n[options]\ntol_exat = 1e-6\n"
    with pytest.raises(UnknownKey) as info:
        parse_config(text)
    assert info.value.key == "tol_exat"
    assert info.value.line == text.splitlines().index("tol_exat = 1e-6") + 1


@pytest.mark.parametrize(
    "edit, exc",
    [
        (("grid = [5, 5, 5]", "grid = [1, 5, 5]"), ValidationError),
        (("max = [1.0, 1.0, 1.0]", "max = [1.0, -1.0, 1.0]"), ValidationError),
        (("[domain]", "[domains]"), UnknownKey),
        (('"2*u*v"', '"2*u*w"'), ValidationError),
        (("grid = [5, 5, 5]", "grid = [5, 5"), ParseError),
    ],
)
def test_rejections(edit, exc):
    with pytest.raises(exc):
        parse_config(MINIMAL.replace(*edit))


def test_missing_section():
    with pytest.raises(MissingSection):
        parse_config(MINIMAL.split("[domain]")[0])


@pytest.mark.parametrize("opt", ["fd_step = 0", "tol_exact = -1", "jet_order = 3", "jet_order = 2.5"])
def test_bad_options(opt):
    with pytest.raises(ValidationError):
        parse_config(MINIMAL + "\n[options]\n" + opt + "\n")


def test_round_trip_idempotent(tmp_path):
    once = dumps_config(parse_config(MINIMAL + '\n[checks]\nsuites = ["ddvv"]\n'))
    twice = dumps_config(parse_config(once))
    assert once == twice
    p = tmp_path / "c.toml"
    p.write_text(twice)
    assert load_config(p).suites == ("ddvv",)
