import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oplearn.dataset import (
    DatasetHeaderError,
    DatasetPayloadError,
    DatasetSpec,
    assemble,
    average_data_size,
    dataset_digest,
    level_counts,
    load,
    read_header,
    realize,
    save,
)
from oplearn.pde import BurgersProblem, PoissonProblem


def small_burgers():
    return BurgersProblem(K=8, K_solver=32, T=0.2)


def test_spec_validation():
    with pytest.raises(ValueError):
        DatasetSpec(10, (9, 17), (0.5, 0.6))
    with pytest.raises(ValueError):
        DatasetSpec(10, (9, 9), (0.5, 0.5))
    with pytest.raises(ValueError):
        DatasetSpec(0, (9,), (1.0,))
    with pytest.raises(ValueError):
        DatasetSpec(10, (9, 17), (1.0,))


def test_level_counts_exact_fractions():
    spec = DatasetSpec(20, (9, 17), (0.75, 0.25))
    np.testing.assert_array_equal(level_counts(spec), [15, 5])


def test_level_counts_largest_remainder():
    # 1946 * (0.55, 0.30, 0.15) = (1070.3, 583.8, 291.9): floor gives 1944,
    # the two largest remainders (.9, .8) get the leftover samples
    spec = DatasetSpec(1946, (9, 17, 33), (0.55, 0.30, 0.15))
    counts = level_counts(spec)
    np.testing.assert_array_equal(counts, [1070, 584, 292])
    assert counts.sum() == 1946


@settings(max_examples=40)
@given(st.integers(1, 500), st.integers(1, 4), st.integers(0, 10_000))
def test_level_counts_always_sum_to_n(n, m, seed):
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.05, 1.0, size=m)
    props = tuple(raw / raw.sum())
    props = props[:-1] + (1.0 - sum(props[:-1]),)
    spec = DatasetSpec(n, tuple(9 + 8 * i for i in range(m)), props)
    counts = level_counts(spec)
    assert counts.sum() == n
    assert np.all(counts >= 0)
    # never off by more than one from the exact fraction
    for c, p in zip(counts, props):
        assert abs(c - p * n) < 1.0


def test_average_data_size_values():
    # the expected node count per sample for mixtures used in cost accounting
    assert average_data_size(DatasetSpec(10, (18, 82), (0.95, 0.05)), 2) == pytest.approx(644.0)
    assert average_data_size(DatasetSpec(10, (17,), (1.0,)), 2) == pytest.approx(289.0)


def test_assemble_counts_and_grids():
    ds = assemble(small_burgers(), DatasetSpec(10, (9, 17), (0.7, 0.3)), 5)
    assert ds.N == 10
    rs = [inp.grid.R for inp, _ in ds.samples]
    assert sorted(set(rs)) == [9, 17]
    assert rs.count(9) == 7 and rs.count(17) == 3
    for inp, out in ds.samples:
        assert inp.grid is out.grid


def test_assemble_deterministic():
    prob = small_burgers()
    spec = DatasetSpec(6, (9, 17), (0.5, 0.5))
    a = assemble(prob, spec, 12)
    b = assemble(prob, spec, 12)
    assert dataset_digest(a) == dataset_digest(b)
    c = assemble(prob, spec, 13)
    assert dataset_digest(a) != dataset_digest(c)


def test_truths_independent_of_fidelity_mixture():
    # swapping the mixture must not change any sample's underlying truth:
    # a sample appearing at the same resolution in two different mixtures
    # has identical values
    prob = small_burgers()
    a = assemble(prob, DatasetSpec(8, (9, 17), (0.5, 0.5)), 3)
    b = assemble(prob, DatasetSpec(8, (9, 33), (0.5, 0.5)), 3)
    for (ia, _), (ib, _) in zip(a.samples, b.samples):
        if ia.grid.R == ib.grid.R:
            np.testing.assert_array_equal(ia.values, ib.values)


def test_realize_reuses_pairs():
    prob = small_burgers()
    pairs = prob.generate_pairs(4, 6)
    spec = DatasetSpec(6, (9,), (1.0,))
    ds1 = realize(prob, pairs, spec, 4)
    ds2 = assemble(prob, spec, 4)
    assert dataset_digest(ds1) == dataset_digest(ds2)
    with pytest.raises(ValueError):
        realize(prob, pairs[:3], spec, 4)


def test_round_trip_bit_exact(tmp_path):
    ds = assemble(small_burgers(), DatasetSpec(5, (9, 17), (0.6, 0.4)), 21)
    path = tmp_path / "d.bin"
    save(ds, str(path))
    back = load(str(path))
    assert back.N == ds.N
    assert back.problem == ds.problem
    assert back.spec == ds.spec
    assert back.master_seed == 21
    for (i1, o1), (i2, o2) in zip(ds.samples, back.samples):
        np.testing.assert_array_equal(i1.values, i2.values)
        np.testing.assert_array_equal(o1.values, o2.values)
    assert dataset_digest(back) == dataset_digest(ds)


def test_save_is_deterministic(tmp_path):
    ds = assemble(small_burgers(), DatasetSpec(4, (9,), (1.0,)), 2)
    p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
    save(ds, str(p1))
    save(ds, str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_header_error_vs_payload_error(tmp_path):
    ds = assemble(small_burgers(), DatasetSpec(3, (9,), (1.0,)), 2)
    path = tmp_path / "d.bin"
    save(ds, str(path))
    raw = path.read_bytes()

    bad_header = tmp_path / "h.bin"
    bad_header.write_bytes(b"magic = something-else\n" + raw.split(b"\n", 1)[1])
    with pytest.raises(DatasetHeaderError):
        load(str(bad_header))

    truncated = tmp_path / "t.bin"
    truncated.write_bytes(raw[:-16])
    with pytest.raises(DatasetPayloadError):
        load(str(truncated))

    no_term = tmp_path / "n.bin"
    no_term.write_bytes(b"magic = oplearn-dataset\nversion = 1\n")
    with pytest.raises(DatasetHeaderError):
        load(str(no_term))


def test_read_header_fields(tmp_path):
    ds = assemble(small_burgers(), DatasetSpec(3, (9, 17), (0.4, 0.6)), 9)
    path = tmp_path / "d.bin"
    save(ds, str(path))
    fields = read_header(str(path))
    assert fields["problem"] == "burgers"
    assert fields["N"] == "3"
    assert fields["master_seed"] == "9"
    assert [int(r) for r in fields["resolutions"].split()] == [9, 17]


def test_poisson_dataset_2d(tmp_path):
    ds = assemble(PoissonProblem(K=4), DatasetSpec(4, (6, 10), (0.5, 0.5)), 1)
    assert all(inp.values.shape == (inp.grid.R**2,) for inp, _ in ds.samples)
    path = tmp_path / "p.bin"
    save(ds, str(path))
    back = load(str(path))
    assert back.d == 2
    assert dataset_digest(back) == dataset_digest(ds)
