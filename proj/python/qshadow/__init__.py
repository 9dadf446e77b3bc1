"""Squeezed-vacuum shadow imaging simulator.

Python bindings over the native core: spatial field construction, analytic
quadrature-variance theory, Monte Carlo camera synthesis, frame analysis, and
the configuration-driven experiment runner.
"""

from qshadow._core import (  # noqa: F401
    CameraParams,
    ComplexField,
    ConfigError,
    CrossSection,
    DetectionDisc,
    ExperimentConfig,
    Grid,
    IoError,
    KineticCluster,
    Mask,
    ParameterError,
    PhysicalityError,
    ScalarMap,
    Scene,
    SceneSampler,
    ShapeError,
    SqueezerParams,
    apply_mask,
    bin_counts,
    binned_variance_general,
    binned_variance_mode_matched,
    cross_section,
    derive_stream_seed,
    estimate_variance_map,
    expected_variance,
    gaussian_mode,
    ideal_transmission_map,
    photon_budget,
    pixel_variance_map,
    propagate,
    read_cluster,
    read_field,
    read_map_csv,
    rect_mask,
    run_classical,
    run_simulate,
    run_sweep,
    run_theory,
    similarity,
    snr_quantum,
    snr_ratio,
    snr_traditional,
    synthesize_classical_cluster,
    synthesize_quantum_cluster,
    to_decibels,
    transmission_quantum,
    transmission_traditional,
    write_cluster,
    write_field,
    write_map_csv,
    write_map_pgm16,
)

__version__ = "0.1.0"
