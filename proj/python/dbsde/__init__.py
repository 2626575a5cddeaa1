from ._dbsde import (
    ConfigError,
    GridSpec,
    ModelError,
    NumericalError,
    Solution,
    derive_stream_seed,
    increment_moments,
    make_grid,
    oracle_root,
    run_comparison,
    run_table,
    sample_path,
    solve,
)

__all__ = [
    "ConfigError",
    "GridSpec",
    "ModelError",
    "NumericalError",
    "Solution",
    "derive_stream_seed",
    "increment_moments",
    "make_grid",
    "oracle_root",
    "run_comparison",
    "run_table",
    "sample_path",
    "solve",
]
