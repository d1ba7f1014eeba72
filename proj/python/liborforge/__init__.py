"""Arbitrage-free LIBOR and forward-price models."""

from ._liborforge import (  # noqa: F401
    AffineDriver,
    CalibrationError,
    ContractError,
    DivergenceError,
    DomainError,
    Error,
    InvariantError,
    Model,
    NumericalError,
    PathGrid,
    RangeError,
    SchemaError,
    SimulationError,
    TenorIndexError,
    calibrate_u,
    canonicalize_spec,
    mgf,
    riccati_solve,
    run_cli,
)
