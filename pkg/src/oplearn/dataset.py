"""Multifidelity dataset assembly and the on-disk container.

A dataset is N input/output sample pairs, each pair sharing one grid, with
the grids drawn from M distinct resolutions in proportions p_i. On disk:
a plain-text header (terminated by "---") followed by a little-endian
float64 payload, input values then output values per sample, row-major
node order, samples in dataset order.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .grid import FunctionSample, make_uniform_grid
from .pde import evaluate_on_grid

FORMAT_MAGIC = "oplearn-dataset"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class DatasetSpec:
    N: int
    resolutions: tuple
    proportions: tuple

    def __post_init__(self):
        if len(self.resolutions) != len(self.proportions):
            raise ValueError("resolutions and proportions must have equal length")
        if len(set(self.resolutions)) != len(self.resolutions):
            raise ValueError("duplicate resolutions in dataset spec")
        if abs(sum(self.proportions) - 1.0) > 1e-12:
            raise ValueError("proportions must sum to 1")
        if self.N < 1:
            raise ValueError("N must be >= 1")

    @property
    def M(self):
        return len(self.resolutions)


def level_counts(spec):
    """Samples per fidelity level via largest-remainder rounding."""
    exact = np.array([p * spec.N for p in spec.proportions])
    counts = np.floor(exact).astype(int)
    short = spec.N - counts.sum()
    order = np.argsort(-(exact - counts), kind="stable")
    for i in range(short):
        counts[order[i]] += 1
    return counts


def average_data_size(spec, d):
    """Expected node count per sample: sum of p_i * R_i^d."""
    return float(sum(p * r**d for p, r in zip(spec.proportions, spec.resolutions)))


@dataclass
class MultifidelityDataset:
    samples: list  # list of (FunctionSample, FunctionSample) pairs
    spec: DatasetSpec
    d: int
    problem: str
    master_seed: int
    config_digest: str

    @property
    def N(self):
        return len(self.samples)

    def resolutions_present(self):
        return sorted({inp.grid.R for inp, _ in self.samples})


def _config_digest(problem):
    items = ";".join(f"{k}={v}" for k, v in sorted(problem.config_items().items()))
    return hashlib.sha256(items.encode()).hexdigest()[:16]


def assemble(problem, spec, master_seed):
    """Generate N spectral-truth pairs, assign fidelity levels, and evaluate
    each pair on its level's grid.

    The truth for sample i depends only on (problem config, master_seed, i);
    level assignment (first ceil(p_1 N) to level 1, etc., then a global
    seeded shuffle) never feeds back into generation.
    """
    pairs = problem.generate_pairs(master_seed, spec.N)
    return realize(problem, pairs, spec, master_seed)


def realize(problem, pairs, spec, master_seed):
    """Assemble a dataset from precomputed spectral-truth pairs.

    Useful when one pool of truths is evaluated at many resolutions: the
    expensive solves run once and each realize() call is cheap.
    """
    if len(pairs) != spec.N:
        raise ValueError(f"got {len(pairs)} pairs for N={spec.N}")
    counts = level_counts(spec)
    levels = np.repeat(np.arange(spec.M), counts)
    rng = np.random.default_rng([master_seed, spec.N, 0x5A])
    rng.shuffle(levels)
    grids = {R: make_uniform_grid(problem.d, R) for R in spec.resolutions}
    samples = []
    for (fin, fout), lvl in zip(pairs, levels):
        g = grids[spec.resolutions[lvl]]
        samples.append((evaluate_on_grid(fin, g), evaluate_on_grid(fout, g)))
    return MultifidelityDataset(
        samples=samples,
        spec=spec,
        d=problem.d,
        problem=problem.name,
        master_seed=master_seed,
        config_digest=_config_digest(problem),
    )


def dataset_digest(ds):
    h = hashlib.sha256()
    for inp, out in ds.samples:
        h.update(inp.values.tobytes())
        h.update(out.values.tobytes())
    return h.hexdigest()[:16]


def save(ds, path):
    per_sample_R = [inp.grid.R for inp, _ in ds.samples]
    offsets = []
    pos = 0
    for R in per_sample_R:
        offsets.append(pos)
        pos += 2 * R**ds.d * 8
    header = [
        f"magic = {FORMAT_MAGIC}",
        f"version = {FORMAT_VERSION}",
        f"problem = {ds.problem}",
        f"d = {ds.d}",
        f"N = {ds.spec.N}",
        "resolutions = " + " ".join(str(r) for r in ds.spec.resolutions),
        "proportions = " + " ".join(repr(p) for p in ds.spec.proportions),
        f"master_seed = {ds.master_seed}",
        f"config_digest = {ds.config_digest}",
        "sample_R = " + " ".join(str(r) for r in per_sample_R),
        "sample_offsets = " + " ".join(str(o) for o in offsets),
        f"payload_bytes = {pos}",
        "---",
    ]
    with open(path, "wb") as f:
        f.write("\n".join(header).encode() + b"\n")
        for inp, out in ds.samples:
            f.write(inp.values.astype("<f8").tobytes())
            f.write(out.values.astype("<f8").tobytes())


class DatasetHeaderError(ValueError):
    pass


class DatasetPayloadError(ValueError):
    pass


def read_header(path):
    fields = {}
    with open(path, "rb") as f:
        while True:
            line = f.readline()
            if not line:
                raise DatasetHeaderError("missing header terminator")
            text = line.decode(errors="replace").strip()
            if text == "---":
                break
            key, sep, value = text.partition(" = ")
            if not sep:
                raise DatasetHeaderError(f"malformed header line: {text!r}")
            fields[key] = value
    if fields.get("magic") != FORMAT_MAGIC:
        raise DatasetHeaderError("not a dataset file")
    if int(fields.get("version", -1)) != FORMAT_VERSION:
        raise DatasetHeaderError(f"unsupported version {fields.get('version')}")
    return fields


def load(path):
    fields = read_header(path)
    with open(path, "rb") as f:
        while f.readline().strip() != b"---":
            pass
        raw = f.read()
    d = int(fields["d"])
    spec = DatasetSpec(
        N=int(fields["N"]),
        resolutions=tuple(int(r) for r in fields["resolutions"].split()),
        proportions=tuple(float(p) for p in fields["proportions"].split()),
    )
    per_sample_R = [int(r) for r in fields["sample_R"].split()]
    if len(per_sample_R) != spec.N:
        raise DatasetPayloadError("declared N does not match per-sample resolution list")
    expected = int(fields["payload_bytes"])
    if len(raw) != expected:
        raise DatasetPayloadError(
            f"payload is {len(raw)} bytes, header declares {expected}"
        )
    grids = {R: make_uniform_grid(d, R) for R in set(per_sample_R)}
    samples = []
    pos = 0
    for R in per_sample_R:
        n = R**d
        block = np.frombuffer(raw, dtype="<f8", count=2 * n, offset=pos).astype(float)
        pos += 2 * n * 8
        g = grids[R]
        samples.append(
            (FunctionSample(g, block[:n].copy()), FunctionSample(g, block[n:].copy()))
        )
    return MultifidelityDataset(
        samples=samples,
        spec=spec,
        d=d,
        problem=fields["problem"],
        master_seed=int(fields["master_seed"]),
        config_digest=fields["config_digest"],
    )


def export_csv(ds, directory):
    """Per-sample CSV export for inspection: sample_<i>_{input,output}.csv with
    one row per node (coordinates then value)."""
    import os

    os.makedirs(directory, exist_ok=True)
    for i, (inp, out) in enumerate(ds.samples):
        for tag, s in (("input", inp), ("output", out)):
            rows = np.column_stack([s.grid.points, s.values])
            np.savetxt(
                os.path.join(directory, f"sample_{i:05d}_{tag}.csv"),
                rows,
                delimiter=",",
                header=",".join([f"x{j}" for j in range(s.grid.d)] + ["value"]),
                comments="",
            )
