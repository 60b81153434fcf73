import pytest

from frontkit.config import ConfigError, parse_kernel, parse_model
from frontkit.models import LotkaVolterraModel, NicholsonModel, ZouModel


def test_kernel_literal_atoms():
    k = parse_kernel([[-1.0, 0.5], [0.0, 0.5]])
    assert k.atoms == ((-1.0, 0.5), (0.0, 0.5))
    assert k.tau == 1.0


def test_kernel_literal_point():
    k = parse_kernel({"point": -2.0})
    assert k.atoms == ((-2.0, 1.0),)
    k2 = parse_kernel({"point": 0, "tau": 3.0})
    assert k2.tau == 3.0


def test_kernel_literal_uniform():
    k = parse_kernel({"uniform": {"tau": 2.0, "atoms": 4}})
    assert len(k.atoms) == 4
    assert k.stieltjes(lambda s: 1.0) == pytest.approx(1.0)
    assert k.stieltjes(lambda s: s) == pytest.approx(-1.0)


def test_kernel_literal_rejected():
    with pytest.raises(ConfigError):
        parse_kernel({"gauss": 1.0})
    with pytest.raises(ConfigError):
        parse_kernel({"point": -1.0, "sigma": 2.0})
    with pytest.raises(ConfigError):
        parse_kernel([[-1.0, 0.5]])  # mass 0.5


def test_model_block_full_matrix():
    m = parse_model({
        "kind": "lotka_volterra",
        "d": [0.5, 0.5], "r": [1.0, 1.0],
        "c": [[1.0, 0.2], [0.2, 1.0]],
        "kernels": [[{"uniform": {"tau": 1.0, "atoms": 3}}, {"point": 0}],
                    [{"point": 0}, [[-1.0, 0.4], [0.0, 0.6]]]],
    })
    assert isinstance(m, LotkaVolterraModel)
    assert m.tau == 1.0
    assert m.a == pytest.approx([0.0, 0.6])


def test_model_preset_reference():
    m = parse_model({"preset": "fisher"})
    assert m.kind == "fisher"
    with pytest.raises(ConfigError):
        parse_model({"preset": "not-a-preset"})


def test_model_scalar_kinds():
    assert isinstance(parse_model({"kind": "zou", "r": 2.0}), ZouModel)
    assert isinstance(parse_model({"kind": "nicholson"}), NicholsonModel)
    with pytest.raises(ConfigError):
        parse_model({"kind": "lotka_volterra", "d": [1.0], "r": [1.0],
                     "c": [[-1.0]]})
    with pytest.raises(ConfigError):
        parse_model({"kind": "unknown"})
