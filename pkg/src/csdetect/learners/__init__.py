"""Tree-ensemble classifiers over the four severity classes.

All learners expose ``fit(X, y)``, ``predict_proba(X)`` (points on the
4-simplex), and ``predict(X)`` (argmax with ties broken toward the lower,
less severe ordinal).
"""

from .boosting import GradientBoostedTrees, log_loss, softmax
from .forest import ExtraTrees, RandomForest
from .linear import MultinomialLogit
from .stacking import StackingEnsemble

MODEL_KINDS = ("rf", "et", "gbt", "stack")


def make_model(kind: str, seed: int = 0, threads: int = 1, params: dict | None = None):
    """Instantiate a learner by config name with optional hyperparameter
    overrides."""
    params = dict(params or {})
    params.setdefault("seed", seed)
    if kind == "rf":
        params.setdefault("threads", threads)
        return RandomForest(**params)
    if kind == "et":
        params.setdefault("threads", threads)
        return ExtraTrees(**params)
    if kind == "gbt":
        return GradientBoostedTrees(**params)
    if kind == "stack":
        params.setdefault("threads", threads)
        return StackingEnsemble(**params)
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


__all__ = [
    "ExtraTrees",
    "GradientBoostedTrees",
    "MODEL_KINDS",
    "MultinomialLogit",
    "RandomForest",
    "StackingEnsemble",
    "log_loss",
    "make_model",
    "softmax",
]
