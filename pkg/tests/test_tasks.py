import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcsguard.tasks import (
    FEATURE_NAMES,
    ConfigurationError,
    FeatureScaler,
    GenerationConfig,
    decode_features,
    encode_tasks,
    feature_matrix,
    generate_tasks,
    grid_cell,
    read_dataset_csv,
    split_dataset,
    write_dataset_csv,
)


def small_config(**overrides):
    base = dict(total_tasks=400, rng_seed=11)
    base.update(overrides)
    return GenerationConfig(**base)


def test_paper_scale_class_counts():
    tasks = generate_tasks(GenerationConfig(rng_seed=1))
    legit = sum(t.legitimacy for t in tasks)
    assert len(tasks) == 14484
    assert legit == 12587
    assert len(tasks) - legit == 1897


def test_zero_tasks_rejected():
    with pytest.raises(ConfigurationError):
        generate_tasks(GenerationConfig(total_tasks=0))


@pytest.mark.parametrize(
    "field,value",
    [
        ("fake_fraction", 0.0),
        ("fake_fraction", 1.0),
        ("split_ratio", 1.5),
        ("bounding_box", (45.5, 45.4, -75.3, -75.1)),
        ("grid_resolution", 0),
    ],
)
def test_invalid_config_rejected(field, value):
    with pytest.raises(ConfigurationError):
        generate_tasks(small_config(**{field: value}))


def test_field_ranges_and_grid_consistency():
    config = small_config(total_tasks=3000)
    tasks = generate_tasks(config)
    lat_min, lat_max, lon_min, lon_max = config.bounding_box
    start, end = config.on_peak_window
    for t in tasks:
        assert 1 <= t.day <= 6
        assert 0 <= t.hour <= 23
        assert 0 <= t.minute <= 59
        assert t.duration in (10, 20, 30, 40, 50, 60)
        assert 1 <= t.battery_pct <= 10
        assert 30.0 <= t.coverage <= 100.0
        assert lat_min <= t.latitude <= lat_max
        assert lon_min <= t.longitude <= lon_max
        if t.legitimacy:
            assert 0 <= t.remaining_time < t.duration
        else:
            assert t.remaining_time == t.duration
        assert t.on_peak_hour == (start <= t.hour <= end)
    grids = grid_cell(
        np.array([t.latitude for t in tasks]),
        np.array([t.longitude for t in tasks]),
        config,
    )
    assert [t.grid_number for t in tasks] == grids.tolist()
    assert all(0 <= g < config.grid_resolution**2 for g in grids)


def test_full_remaining_time_mode():
    tasks = generate_tasks(small_config(remaining_time_mode="full"))
    assert all(t.remaining_time == t.duration for t in tasks)


def test_fake_tasks_follow_table_distributions():
    # Large-n frequency check of the fake-task columns.
    tasks = generate_tasks(GenerationConfig(total_tasks=100000, rng_seed=5))
    fakes = [t for t in tasks if not t.legitimacy]
    durations = np.array([t.duration for t in fakes])
    hours = np.array([t.hour for t in fakes])
    battery = np.array([t.battery_pct for t in fakes])
    assert abs(np.isin(durations, (40, 50, 60)).mean() - 0.70) < 0.015
    assert abs(((hours >= 7) & (hours <= 11)).mean() - 0.80) < 0.015
    assert ((hours >= 7) & (hours <= 17)).all()
    assert abs((battery >= 7).mean() - 0.80) < 0.015


def test_generation_deterministic():
    a = generate_tasks(small_config())
    b = generate_tasks(small_config())
    assert a == b


def test_generation_seed_sensitivity():
    a = generate_tasks(small_config(rng_seed=1))
    b = generate_tasks(small_config(rng_seed=2))
    assert a != b


def test_encode_endpoints_and_labels():
    tasks = generate_tasks(small_config())
    x, y, scaler = encode_tasks(tasks)
    raw = feature_matrix(tasks)
    for col, name in enumerate(FEATURE_NAMES):
        if name == "on_peak_hour":
            assert set(np.unique(x[:, col])) <= {-1.0, 1.0}
            continue
        assert x[raw[:, col].argmax(), col] == pytest.approx(1.0)
        assert x[raw[:, col].argmin(), col] == pytest.approx(-1.0)
    assert x.min() >= -1.0 and x.max() <= 1.0
    assert set(np.unique(y)) == {0, 1}
    assert (y == 1).sum() == sum(t.legitimacy for t in tasks)


def test_encode_round_trip():
    # Inverse-transform oracle: decode(encode(t)) recovers the raw features.
    tasks = generate_tasks(small_config())
    raw = feature_matrix(tasks)
    x, _, scaler = encode_tasks(tasks)
    recovered = decode_features(x, scaler)
    assert np.allclose(recovered, raw, atol=1e-9)


def test_encode_constant_feature_maps_to_zero():
    tasks = generate_tasks(small_config())
    for t in tasks:
        t.day = 3
    x, _, _ = encode_tasks(tasks)
    assert (x[:, FEATURE_NAMES.index("day")] == 0.0).all()


def test_encode_empty_rejected():
    with pytest.raises(ValueError):
        encode_tasks([])


def test_supplied_scaler_applied_unchanged():
    tasks = generate_tasks(small_config())
    _, _, scaler = encode_tasks(tasks[:200])
    x, _, scaler2 = encode_tasks(tasks[200:], scaler=scaler)
    assert scaler2 is scaler
    raw = feature_matrix(tasks[200:])
    assert np.allclose(decode_features(x, scaler), raw, atol=1e-9)


def test_split_partitions_all_tasks():
    # Set-partition oracle over task ids.
    config = small_config()
    tasks = generate_tasks(config)
    split = split_dataset(tasks, config)
    assert len(split.train_x) + len(split.test_x) == len(tasks)
    # Scaler fitted on train only: train encodes inside [-1, 1].
    assert split.train_x.min() >= -1.0 and split.train_x.max() <= 1.0
    n_train_fake = (split.train_y == 0).sum()
    n_test_fake = (split.test_y == 0).sum()
    assert n_train_fake + n_test_fake == sum(not t.legitimacy for t in tasks)


def test_split_small_case_counts():
    config = GenerationConfig(total_tasks=10, fake_fraction=0.2, split_ratio=0.8, rng_seed=0)
    tasks = generate_tasks(config)
    assert sum(not t.legitimacy for t in tasks) == 2
    split = split_dataset(tasks, config)
    assert len(split.train_x) == 8 and len(split.test_x) == 2
    assert (split.train_y == 0).sum() == 1
    assert (split.test_y == 0).sum() == 1


def test_split_paper_scale_counts():
    config = GenerationConfig(rng_seed=1)
    tasks = generate_tasks(config)
    split = split_dataset(tasks, config)
    # Stratified 80/20 of 1,897 fakes and 12,587 legitimate tasks.
    assert len(split.train_x) == 11587
    assert len(split.test_x) == 2897
    assert (split.train_y == 0).sum() == 1518
    assert (split.test_y == 0).sum() == 379
    frac_train = (split.train_y == 0).mean()
    frac_test = (split.test_y == 0).mean()
    assert abs(frac_train - frac_test) <= 1.0 / len(split.test_y)


def test_split_single_member_class_rejected():
    config = GenerationConfig(total_tasks=50, fake_fraction=0.001, rng_seed=0)
    tasks = generate_tasks(config)
    assert sum(not t.legitimacy for t in tasks) == 1
    with pytest.raises(ValueError):
        split_dataset(tasks, config)


def test_split_provenance_tags():
    config = small_config()
    tasks = generate_tasks(config)
    split = split_dataset(tasks, config)
    assert ((split.train_provenance == "legitimate") == (split.train_y == 1)).all()
    assert ((split.test_provenance == "original_fake") == (split.test_y == 0)).all()


@settings(max_examples=60, deadline=None)
@given(
    n_fake=st.integers(2, 120),
    n_legit=st.integers(2, 600),
    ratio=st.floats(0.2, 0.9),
    seed=st.integers(0, 2**31 - 1),
)
def test_split_stratification_property(n_fake, n_legit, ratio, seed):
    # Oracle: enumerate every allocation keeping both classes nonempty on
    # both sides; the split must achieve the smallest possible gap between
    # train and test fake fractions.
    total = n_fake + n_legit
    config = GenerationConfig(
        total_tasks=total, fake_fraction=n_fake / total, split_ratio=ratio, rng_seed=seed
    )
    tasks = generate_tasks(config)
    split = split_dataset(tasks, config)
    n_train = len(split.train_y)
    n_test = len(split.test_y)
    best_gap = min(
        abs(f / n_train - (n_fake - f) / n_test)
        for f in range(1, n_fake)
        if 1 <= n_train - f <= n_legit - 1
    )
    frac_train = (split.train_y == 0).mean()
    frac_test = (split.test_y == 0).mean()
    assert abs(frac_train - frac_test) <= best_gap + 1e-12
    assert (split.train_y == 0).sum() >= 1 and (split.test_y == 0).sum() >= 1
    assert (split.train_y == 1).sum() >= 1 and (split.test_y == 1).sum() >= 1


def test_dataset_csv_round_trip(tmp_path):
    tasks = generate_tasks(small_config())
    path = tmp_path / "dataset.csv"
    write_dataset_csv(tasks, path)
    header = path.read_text().splitlines()[0]
    assert header.split(",")[:3] == ["id", "latitude", "longitude"]
    assert header.split(",")[-1] == "provenance"
    assert read_dataset_csv(path) == tasks


def test_scaler_json_round_trip(tmp_path):
    tasks = generate_tasks(small_config())
    _, _, scaler = encode_tasks(tasks)
    path = tmp_path / "scaler.json"
    scaler.to_json(path)
    loaded = FeatureScaler.from_json(path)
    assert loaded.names == tuple(scaler.names)
    assert np.array_equal(loaded.mins, scaler.mins)
    assert np.array_equal(loaded.maxs, scaler.maxs)
