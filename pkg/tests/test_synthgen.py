import pytest

from jobrec.domain import InteractionKind
from jobrec.errors import ConfigInvalid
from jobrec.synthgen import (
    GeneratorConfig,
    GroundTruth,
    generate,
    positive_kind_split,
    write_corpus,
)

TINY = dict(n_candidates=40, n_jobs=30, n_interactions=8_000,
            n_ladders=2, ladder_depth=5, positive_rate=0.3,
            noise_rate=0.05, seed=1)


@pytest.mark.parametrize("bad", [
    dict(n_candidates=0),
    dict(n_interactions=-5),
    dict(ladder_depth=2),
    dict(n_ladders=0),
    dict(positive_rate=1.5),
    dict(noise_rate=0.5),
    dict(n_jobs=5),                       # below 2x5 ladder slots
    dict(n_interactions=40 * 100_000),    # per-candidate >= horizon
    dict(positive_rate=0.02),             # unreachable under the noise floor
])
def test_config_validation(bad):
    with pytest.raises(ConfigInvalid):
        GeneratorConfig(**{**TINY, **bad})


def test_generate_exact_counts():
    ds, truth = generate(GeneratorConfig(**TINY))
    assert len(ds.candidates) == 40
    assert len(ds.jobs) == 30
    assert len(ds.interactions) == 8_000
    assert set(truth.job_position) == set(ds.jobs)
    assert set(truth.candidate_ladder) == set(ds.candidates)
    # every candidate carries one snapshot per level it ever occupies
    for cid, snaps in ds.snapshots.items():
        times = truth.candidate_advance_times[cid]
        assert [s.as_of for s in snaps] == [0, *times]


def test_generate_positive_share_near_target():
    ds, _ = generate(GeneratorConfig(**TINY))
    positive = sum(1 for i in ds.interactions
                   if i.kind is not InteractionKind.SHOWN_IGNORED)
    share = positive / len(ds.interactions)
    assert abs(share - 0.3) <= 0.02


def test_generate_is_deterministic(tmp_path):
    config = GeneratorConfig(**TINY)
    paths_a = write_corpus(*generate(config), str(tmp_path / "a"))
    paths_b = write_corpus(*generate(config), str(tmp_path / "b"))
    assert set(paths_a) == {"candidates", "jobs", "interactions",
                            "ground_truth"}
    for key in paths_a:
        with open(paths_a[key], "rb") as fa, open(paths_b[key], "rb") as fb:
            assert fa.read() == fb.read(), key


def test_different_seeds_differ():
    ds1, _ = generate(GeneratorConfig(**TINY))
    ds2, _ = generate(GeneratorConfig(**{**TINY, "seed": 2}))
    kinds1 = [i.kind for i in ds1.interactions]
    kinds2 = [i.kind for i in ds2.interactions]
    assert kinds1 != kinds2


def test_ground_truth_round_trip(tmp_path):
    _, truth = generate(GeneratorConfig(**TINY))
    path = str(tmp_path / "truth.jsonl")
    truth.save(path)
    loaded = GroundTruth.load(path)
    assert loaded.horizon == truth.horizon
    assert loaded.noise_rate == truth.noise_rate
    assert loaded.candidate_ladder == truth.candidate_ladder
    assert loaded.candidate_start_level == truth.candidate_start_level
    assert loaded.candidate_advance_times == truth.candidate_advance_times
    assert loaded.job_position == truth.job_position


def test_level_and_pref_rule():
    truth = GroundTruth(
        horizon=1000, noise_rate=0.0,
        candidate_ladder={"c": 0},
        candidate_start_level={"c": 1},
        candidate_advance_times={"c": (100, 400)},
        job_position={"next": (0, 2), "same": (0, 1), "jump": (0, 3),
                      "other": (1, 2)},
    )
    assert truth.level_at("c", 0) == 1
    assert truth.level_at("c", 99) == 1
    assert truth.level_at("c", 100) == 2   # advancement applies at its tick
    assert truth.level_at("c", 500) == 3
    assert truth.pref("c", "next", 50) == 1.0
    assert truth.pref("c", "same", 50) == 0.0
    assert truth.pref("c", "jump", 50) == 0.0
    assert truth.pref("c", "other", 50) == 0.0
    assert truth.pref("c", "jump", 150) == 1.0   # level rose, target moved


def test_positive_interactions_track_planted_rule():
    ds, truth = generate(GeneratorConfig(**TINY))
    positives = [i for i in ds.interactions
                 if i.kind is not InteractionKind.SHOWN_IGNORED]
    aligned = sum(truth.pref(i.candidate_id, i.job_id, i.timestamp)
                  for i in positives)
    # planted labels flip with probability noise_rate, so among positives
    # the aligned share is q(1-n)/p with q = (p-n)/(1-2n)
    p, n = 0.3, 0.05
    q = (p - n) / (1.0 - 2.0 * n)
    expected = q * (1.0 - n) / p
    assert aligned / len(positives) == pytest.approx(expected, abs=0.03)


def test_positive_kind_split_shares():
    split = positive_kind_split(100_000, seed=0)
    assert sum(split.values()) == 100_000
    total = 215218 + 72794 + 28486
    assert split[InteractionKind.RECRUITER_TAG] / 100_000 == pytest.approx(
        215218 / total, abs=0.01)
    assert split[InteractionKind.APPLY] / 100_000 == pytest.approx(
        28486 / total, abs=0.01)
    assert positive_kind_split(0, seed=0) == {
        InteractionKind.RECRUITER_TAG: 0,
        InteractionKind.EXPAND: 0,
        InteractionKind.APPLY: 0,
    }
    with pytest.raises(ConfigInvalid):
        positive_kind_split(-1, seed=0)


def test_small_preset_scale():
    config = GeneratorConfig.small(seed=3)
    assert (config.n_candidates, config.n_jobs) == (800, 400)
    assert config.n_interactions == 50_000
    assert config.seed == 3
