"""Python access to the fademac analysis and simulation core."""

from fademac._fademac import (
    BackoffParams,
    CaptureParams,
    ConfigError,
    CsmaCase,
    PropagationParams,
    RetryLimits,
    UnknownExperiment,
    __version__,
    backoff_stationary_mean_slots,
    ca_blocks,
    capture_line,
    config_text,
    csma_blocks,
    default_config_text,
    distance_for_delivery_ratio,
    expected_backoff_slots,
    experiments,
    link_delivery_ratio,
    mean_received_power_dbm,
    packet_delivery,
    packet_delivery_long_rtscts,
    packet_delivery_no_rts,
    packet_delivery_short_rtscts,
    rerun,
    run_experiment,
    saturation_capacity,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
