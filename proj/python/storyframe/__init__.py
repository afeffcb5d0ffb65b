"""Narrative feature extraction and analysis for labelled advice-forum stories."""

from ._core import (
    __version__,
    bh_correct,
    class_balance,
    cohens_d,
    config_hash,
    count_words,
    dl_distance,
    extract_demographics,
    jenks_breaks,
    load_config,
    normalize,
    ols_slope,
    run,
    stratified_folds,
    tokenize,
    undersample,
    welch_t,
)

__all__ = [
    "__version__",
    "bh_correct",
    "class_balance",
    "cohens_d",
    "config_hash",
    "count_words",
    "dl_distance",
    "extract_demographics",
    "jenks_breaks",
    "load_config",
    "normalize",
    "ols_slope",
    "run",
    "stratified_folds",
    "tokenize",
    "undersample",
    "welch_t",
]
