"""Consistent-histories analysis of quantum measurement models.

The engine builds history families on a time grid, checks their consistency
through the Gram matrix of chain kets, and assigns extended-Born-rule
probabilities.  Measurement models (projective, POVM, Kraus, preparation)
map pointer outcomes back to properties of the measured system.
"""

from .errors import HistqError
from .histories import (
    Ensemble,
    Event,
    HistoryFamily,
    LinkedSlot,
    PDISlot,
    TimeGrid,
    assign_probabilities,
    chain_ket,
    check_consistency,
)
from .measurement import (
    MeasurementModel,
    backwards_map,
    derive_povm,
    inference_family,
    kraus_model,
    luders_model,
    make_model,
    noncontextuality_check,
    preparation_model,
    projective_model,
)

__version__ = "0.1.0"

__all__ = [
    "Ensemble",
    "Event",
    "HistoryFamily",
    "HistqError",
    "LinkedSlot",
    "MeasurementModel",
    "PDISlot",
    "TimeGrid",
    "assign_probabilities",
    "backwards_map",
    "chain_ket",
    "check_consistency",
    "derive_povm",
    "inference_family",
    "kraus_model",
    "luders_model",
    "make_model",
    "noncontextuality_check",
    "preparation_model",
    "projective_model",
]
