"""Experiment configuration: validation, serialization, and the
builder methods that turn a config into runnable objects."""

import math

import numpy as np
import pytest

from tvdro import RegressionLoss, TableLoss, dump_channel_csv, ldp_channel
from tvdro.distributions import Support, grid_support
from tvdro.experiments.config import ExperimentConfig
from tvdro.experiments.synthetic import lending_grid


def minimal(**overrides):
    base = {"name": "t", "scenario": "three_point"}
    base.update(overrides)
    return ExperimentConfig.from_dict(base)


def two_point(**overrides):
    base = {
        "name": "t",
        "support": {"points": [[0.0], [1.0]]},
        "truth": [0.5, 0.5],
        "channel": {"kind": "ldp", "epsilon": 2.0},
        "loss": {"kind": "table", "rows": [[0.0, 1.0]]},
    }
    base.update(overrides)
    return ExperimentConfig.from_dict(base)


def test_defaults_fill_in():
    cfg = minimal()
    assert cfg.n_grid == [100, 1000, 10000]
    assert cfg.seeds == [0]
    assert cfg.trials == 1000
    assert cfg.alphas == [0.05]
    assert cfg.channel_epsilons == [3.0, 10.0]
    assert cfg.radius == {"alpha": 0.05}
    assert ExperimentConfig.from_dict({}).name == "experiment"


def test_round_trip_through_dict_and_file(tmp_path):
    cfg = minimal(
        scenario="lending_records",
        n_grid=[50, 500],
        seeds=[3, 1, 4],
        radius={"schedule": "one_over_n_squared"},
        solver={"max_iter": 1200, "window": 80},
    )
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict()
    path = tmp_path / "cfg.json"
    cfg.save(path)
    loaded = ExperimentConfig.load(path)
    assert loaded.to_dict() == cfg.to_dict()


def test_unknown_keys_rejected_everywhere():
    with pytest.raises(ValueError):
        minimal(mystery=1)
    with pytest.raises(ValueError):
        minimal(radius={"alpha": 0.05, "flavor": "hot"})
    with pytest.raises(ValueError):
        minimal(solver={"learning_rate": 0.1})
    with pytest.raises(ValueError):
        two_point(support={"points": [[0.0], [1.0]], "shape": "round"})
    with pytest.raises(ValueError):
        two_point(channel={"kind": "ldp", "epsilon": 1.0, "bias": 2})
    with pytest.raises(ValueError):
        two_point(loss={"kind": "table", "rows": [[0.0, 1.0]], "slope": 3})


def test_scenario_names():
    for name in ("three_point", "flip", "lending", "lending_records"):
        assert minimal(scenario=name).scenario == name
    with pytest.raises(ValueError):
        minimal(scenario="roulette")


def test_radius_needs_exactly_one_mode():
    with pytest.raises(ValueError):
        minimal(radius={})
    with pytest.raises(ValueError):
        minimal(radius={"alpha": 0.05, "epsilon": 0.1})
    with pytest.raises(ValueError):
        minimal(radius={"alpha": 1.5})
    with pytest.raises(ValueError):
        minimal(radius={"epsilon": -0.2})
    with pytest.raises(ValueError):
        minimal(radius={"schedule": "harmonic"})
    assert minimal(radius={"epsilon": 0.25}).radius == {"epsilon": 0.25}


def test_grid_and_seed_validation():
    with pytest.raises(ValueError):
        minimal(n_grid=[100, 100])
    with pytest.raises(ValueError):
        minimal(n_grid=[1000, 100])
    with pytest.raises(ValueError):
        minimal(n_grid=[])
    with pytest.raises(ValueError):
        minimal(seeds=[0, 0])
    with pytest.raises(ValueError):
        minimal(seeds=[-1])
    with pytest.raises(ValueError):
        minimal(seeds=[])
    with pytest.raises(ValueError):
        minimal(trials=0)
    with pytest.raises(ValueError):
        minimal(alphas=[0.0])
    with pytest.raises(ValueError):
        minimal(channel_epsilons=[-1.0])


def test_support_needs_exactly_one_form():
    with pytest.raises(ValueError):
        two_point(support={})
    with pytest.raises(ValueError):
        two_point(support={"grid": [[1, 2]], "points": [[0.0]]})


def test_named_truth_is_lending_only():
    cfg = ExperimentConfig.from_dict(
        {
            "name": "t",
            "support": {"grid": [[1, 5], [1, 5], [1, 7]]},
            "truth": "lending",
            "channel": {"kind": "identity"},
            "loss": {"kind": "regression", "lower": [-2, 0, 4], "upper": [0, 1, 9]},
        }
    )
    sup = cfg.build_support()
    assert sup == lending_grid()
    truth = cfg.build_truth(sup)
    assert truth.mass.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(truth.mass >= 0.0)
    with pytest.raises(ValueError):
        two_point(truth="mystery")


def test_build_support_points_and_explicit_truth():
    cfg = ExperimentConfig.from_dict(
        {
            "name": "t",
            "support": {"points": [[0], [2], [3]]},
            "truth": [0.2, 0.3, 0.5],
            "channel": {"kind": "identity"},
            "loss": {"kind": "table", "rows": [[1.0, 2.0, 3.0]]},
        }
    )
    sup = cfg.build_support()
    assert len(sup) == 3
    truth = cfg.build_truth(sup)
    assert truth.mass == pytest.approx([0.2, 0.3, 0.5])
    loss = cfg.build_loss(sup)
    assert isinstance(loss, TableLoss)
    assert loss.table.shape == (1, 3)


def test_scenario_supplies_all_parts():
    cfg = minimal()
    sup = cfg.build_support()
    truth = cfg.build_truth(sup)
    channel = cfg.build_channel(sup)
    loss = cfg.build_loss(sup)
    assert len(sup) == 3
    assert truth.support == sup
    assert channel.input_support == sup
    assert isinstance(loss, TableLoss)
    records = minimal(scenario="lending_records")
    rsup = records.build_support()
    assert len(rsup) == 41
    assert isinstance(records.build_loss(rsup), RegressionLoss)


def test_channel_kinds(tmp_path):
    ldp_cfg = two_point()
    two = ldp_cfg.build_support()
    assert ldp_cfg.build_channel(two).matrix[0, 0] == pytest.approx(
        1.0 / (1.0 + math.exp(-1.0))
    )
    # lane override re-levels an ldp channel but is an error elsewhere
    assert ldp_cfg.build_channel(two, epsilon_override=8.0).matrix[0, 0] > 0.9
    ident = two_point(channel={"kind": "identity"})
    assert np.array_equal(ident.build_channel(two).matrix, np.eye(2))
    with pytest.raises(ValueError):
        ident.build_channel(two, epsilon_override=3.0)
    path = tmp_path / "chan.csv"
    dump_channel_csv(ldp_channel(two, 1.5), path)
    mat_cfg = two_point(channel={"kind": "matrix", "path": str(path)})
    rebuilt = mat_cfg.build_channel(two)
    assert rebuilt.matrix[0, 0] == pytest.approx(
        ldp_channel(two, 1.5).matrix[0, 0], abs=1e-12
    )
    with pytest.raises(ValueError):
        mat_cfg.build_channel(two, epsilon_override=3.0)
    with pytest.raises(ValueError):
        two_point(channel={"kind": "smoke_signal"})


def test_scenario_override_conflicts():
    # an explicit support that is not the scenario's cannot borrow its truth
    cfg = minimal(support={"points": [[0.0], [1.0]]})
    sup = cfg.build_support()
    with pytest.raises(ValueError):
        cfg.build_truth(sup)


def test_radius_epsilon_resolution():
    fixed = minimal(radius={"epsilon": 0.3})
    assert fixed.radius_epsilon(100, 3) == 0.3
    by_alpha = minimal(radius={"alpha": 0.05})
    assert by_alpha.radius_epsilon(100, 4) == pytest.approx(
        0.2716203031481239, abs=0
    )
    scheduled = minimal(radius={"schedule": "one_over_n_squared"})
    assert scheduled.radius_epsilon(50, 3) == pytest.approx(
        math.sqrt(max(3, 2 * math.log(2 * 2500)) / 50)
    )
    # an alpha sweep overrides the policy alpha but not a fixed epsilon
    assert by_alpha.radius_epsilon(100, 4, alpha=0.5) < by_alpha.radius_epsilon(
        100, 4
    )
    assert fixed.radius_epsilon(100, 4, alpha=0.5) == 0.3


def test_solver_kwargs_typed():
    cfg = minimal(solver={"max_iter": 1200, "improvement_tol": 1e-6, "window": 75})
    kw = cfg.solver_kwargs()
    assert kw == {"max_iter": 1200, "improvement_tol": 1e-6, "window": 75}
    assert isinstance(kw["max_iter"], int)
    assert isinstance(kw["window"], int)
    assert minimal().solver_kwargs() == {}


def test_missing_channel_file_fails_at_validation(tmp_path):
    with pytest.raises(FileNotFoundError):
        two_point(
            channel={"kind": "matrix", "path": str(tmp_path / "absent.csv")}
        )


def test_relative_paths_resolve_against_config_dir(tmp_path):
    import json

    sup = Support(np.array([[0.0], [1.0]]))
    dump_channel_csv(ldp_channel(sup, 1.0), tmp_path / "chan.csv")
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(
        json.dumps(
            {
                "name": "t",
                "support": {"points": [[0], [1]]},
                "truth": [0.5, 0.5],
                "channel": {"kind": "matrix", "path": "chan.csv"},
                "loss": {"kind": "table", "rows": [[0.0, 1.0]]},
            }
        )
    )
    loaded = ExperimentConfig.load(cfg_path)
    ch = loaded.build_channel(loaded.build_support())
    assert ch.matrix.shape == (2, 2)


def test_from_dict_rejects_non_dict():
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict([1, 2, 3])
