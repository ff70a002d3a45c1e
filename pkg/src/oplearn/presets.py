"""Default model architectures and training hyperparameters per problem,
plus reduced "desk" presets sized for laptop-CPU runs.
"""

from dataclasses import dataclass

from .model import make_model
from .training import TrainConfig


@dataclass(frozen=True)
class Preset:
    problem: str
    d: int
    modes: int
    p: int
    q: int
    encoder_hidden: tuple
    approximator_hidden: tuple
    reconstructor_hidden: tuple
    lr0: float
    decay: float
    epochs: int
    batch_size: int = 10
    reconstructor_modes: int = None


PRESETS = {
    # full-scale defaults
    "poisson": Preset(
        problem="poisson", d=2, modes=12, p=96, q=96,
        encoder_hidden=(128, 128, 128), approximator_hidden=(256, 256),
        reconstructor_hidden=(128, 128, 128),
        lr0=0.003, decay=0.9995, epochs=2000,
    ),
    "burgers": Preset(
        problem="burgers", d=1, modes=12, p=18, q=18,
        encoder_hidden=(96, 96, 96), approximator_hidden=(128, 128, 128, 128),
        reconstructor_hidden=(96, 96, 96),
        lr0=0.005, decay=0.9970, epochs=1000,
    ),
    "navier_stokes": Preset(
        problem="navier_stokes", d=2, modes=10, p=96, q=96,
        encoder_hidden=(128, 128, 128), approximator_hidden=(256, 256, 256, 256),
        reconstructor_hidden=(128, 128, 128),
        lr0=0.003, decay=0.9990, epochs=750,
    ),
    # desk-scale variants: fewer epochs and (in 2D) narrower nets with larger
    # batches, tuned so a full train/eval cycle stays in the minutes range on
    # one CPU
    "burgers_desk": Preset(
        problem="burgers", d=1, modes=12, p=18, q=18,
        encoder_hidden=(96, 96, 96), approximator_hidden=(128, 128, 128, 128),
        reconstructor_hidden=(96, 96, 96),
        lr0=0.005, decay=0.9950, epochs=300,
    ),
    # variant whose output basis carries Fourier features beyond the Nyquist
    # limit of a coarse training grid; this lets the reconstructor lock onto
    # training node positions, which is the behavior the performance-gap
    # diagnostic measures
    "burgers_desk_bias": Preset(
        problem="burgers", d=1, modes=12, p=18, q=18,
        encoder_hidden=(96, 96, 96), approximator_hidden=(128, 128, 128, 128),
        reconstructor_hidden=(96, 96, 96),
        lr0=0.005, decay=0.9950, epochs=300, reconstructor_modes=32,
    ),
    "poisson_desk": Preset(
        problem="poisson", d=2, modes=8, p=48, q=48,
        encoder_hidden=(64, 64), approximator_hidden=(128, 128),
        reconstructor_hidden=(64, 64),
        lr0=0.004, decay=0.9980, epochs=200, batch_size=32,
        reconstructor_modes=12,
    ),
    "navier_stokes_desk": Preset(
        problem="navier_stokes", d=2, modes=8, p=48, q=48,
        encoder_hidden=(64, 64), approximator_hidden=(128, 128),
        reconstructor_hidden=(64, 64),
        lr0=0.003, decay=0.9970, epochs=120, batch_size=32,
    ),
    # tiny smoke preset for pipeline tests
    "smoke": Preset(
        problem="burgers", d=1, modes=4, p=6, q=6,
        encoder_hidden=(16,), approximator_hidden=(16,),
        reconstructor_hidden=(16,),
        lr0=0.005, decay=0.99, epochs=5,
    ),
    "smoke2d": Preset(
        problem="poisson", d=2, modes=2, p=6, q=6,
        encoder_hidden=(16,), approximator_hidden=(16,),
        reconstructor_hidden=(16,),
        lr0=0.005, decay=0.99, epochs=5,
    ),
}


def build_model(preset, seed):
    return make_model(
        d=preset.d,
        modes=preset.modes,
        p=preset.p,
        q=preset.q,
        encoder_hidden=preset.encoder_hidden,
        approximator_hidden=preset.approximator_hidden,
        reconstructor_hidden=preset.reconstructor_hidden,
        seed=seed,
        problem=preset.problem,
        reconstructor_modes=preset.reconstructor_modes,
    )


def build_train_config(preset, seed, epochs=None, loss="l1"):
    return TrainConfig(
        lr0=preset.lr0,
        decay=preset.decay,
        epochs=preset.epochs if epochs is None else epochs,
        batch_size=preset.batch_size,
        seed=seed,
        loss=loss,
    )
