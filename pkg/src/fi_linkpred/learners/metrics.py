"""Confusion-matrix metrics and ROC AUC, with ``unwanted`` as the positive class."""
from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from ..graph import InteractionLabel


def as_positive(labels) -> np.ndarray:
    """Map labels (InteractionLabel, 'unwanted'/'wanted', bool or 0/1) to a bool array."""
    out = []
    for lab in labels:
        if isinstance(lab, str):
            out.append(InteractionLabel(lab) == InteractionLabel.UNWANTED)
        else:
            out.append(bool(lab))
    return np.array(out, dtype=bool)


@dataclass(frozen=True)
class ClassMetrics:
    tp: int
    fp: int
    tn: int
    fn: int

    @staticmethod
    def _ratio(num, den) -> Optional[float]:
        # 0/0 is reported as undefined (None), never as 1
        return num / den if den else None

    @property
    def accuracy(self) -> Optional[float]:
        return self._ratio(self.tp + self.tn, self.tp + self.tn + self.fp + self.fn)

    @property
    def sensitivity(self) -> Optional[float]:
        return self._ratio(self.tp, self.tp + self.fn)

    @property
    def specificity(self) -> Optional[float]:
        return self._ratio(self.tn, self.tn + self.fp)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(accuracy=self.accuracy, sensitivity=self.sensitivity, specificity=self.specificity)
        return d


def metrics_from_labels(y_true, y_pred) -> ClassMetrics:
    t = as_positive(y_true)
    p = as_positive(y_pred)
    return ClassMetrics(
        tp=int(np.sum(t & p)), fp=int(np.sum(~t & p)), tn=int(np.sum(~t & ~p)), fn=int(np.sum(t & ~p))
    )


def roc_auc(scores, labels) -> float:
    """Mann-Whitney estimate: P(score of a positive > score of a negative), ties count 1/2."""
    s = np.asarray(scores, dtype=np.float64)
    pos = as_positive(labels)
    if s.shape != pos.shape:
        raise ValueError("scores and labels differ in length")
    if pos.all() or not pos.any():
        raise ValueError("roc_auc needs both classes present")
    sp = s[pos][:, None]
    sn = s[~pos][None, :]
    wins = (sp > sn).sum() + 0.5 * (sp == sn).sum()
    return float(wins / (sp.size * sn.size))
