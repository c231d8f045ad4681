"""Matsuoka CPG snake laboratory."""

from ._core import (
    ConfigError,
    DivergenceError,
    DomainError,
    OscillatorParams,
    PhysicsParams,
    Policy,
    SignalStats,
    entrainment_threshold,
    free_amplitude,
    gate_fourier_K,
    gate_fourier_L,
    gp_evaluate,
    harmonic_gain,
    inverse_K,
    load_policy,
    measure_signal,
    natural_frequency,
    predict_bias_constant,
    rollout,
    simulate,
    train,
    validate_params,
    velocity_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
