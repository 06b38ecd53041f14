import numpy as np

from efgpath.bench import BenchConfig, BenchRow, instance_seed, run_bench


def small_config(**kw):
    return BenchConfig(rows=(BenchRow(1, 2, 3, 2), BenchRow(2, 2, 2, 2)), instances=2, master_seed=5, **kw)


def test_seeds_are_stable():
    assert instance_seed(1, 0, 0) == instance_seed(1, 0, 0)
    assert instance_seed(1, 0, 0) != instance_seed(1, 0, 1)
    assert instance_seed(1, 0, 0) != instance_seed(2, 0, 0)


def test_determinism_across_worker_counts():
    a = run_bench(small_config(workers=1))
    b = run_bench(small_config(workers=2))
    key = lambda rep: [(r.row, r.variant, r.instance, r.seed, r.status, r.steps) for r in rep.records]
    assert key(a) == key(b)


def test_summaries_recompute_from_records():
    rep = run_bench(small_config(workers=1))
    assert len(rep.records) == 2 * 2 * 2
    for s in rep.summaries:
        ri = rep.config.rows.index(s.row)
        recs = [r for r in rep.records if r.row == ri and r.variant == s.variant]
        ok = [r.steps for r in recs if r.converged]
        assert s.failure_rate == (len(recs) - len(ok)) / len(recs)
        if ok:
            assert s.iter_med == np.median(ok)
            assert (s.iter_max, s.iter_min) == (max(ok), min(ok))
    assert rep.to_csv().splitlines()[0].startswith("type,n,L,A,dim,variant")


def test_from_dict():
    cfg = BenchConfig.from_dict({"rows": [{"type": 1, "n": 3, "L": 5, "A": 2}, [2, 4, 10, 2]],
                                 "instances": 3, "variants": ["lbne"]})
    assert cfg.rows[1] == BenchRow(2, 4, 10, 2)
    assert cfg.variants == ("lbne",)
    assert cfg.max_steps == 5000 and cfg.max_wall_time == 600
