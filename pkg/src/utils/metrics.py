from __future__ import annotations

from typing import Any, Dict, Iterable, Mapping

import numpy as np


def verification_summary(samples: Iterable[Mapping[str, Any]]) -> Dict[str, Any]:
    """count / passed / max_rel_err / mean_rel_err over serialized sample records.

    Samples whose evaluation failed carry no rel_err and only count.
    """
    samples = list(samples)
    errors = np.array([s["rel_err"] for s in samples if s.get("rel_err") is not None], dtype=float)
    return {
        "count": len(samples),
        "passed": int(sum(1 for s in samples if s["pass"])),
        "max_rel_err": float(errors.max()) if errors.size else None,
        "mean_rel_err": float(errors.mean()) if errors.size else None,
    }


def pass_rate(summary: Mapping[str, Any]) -> float:
    if summary["count"] == 0:
        return 0.0
    return summary["passed"] / summary["count"]
