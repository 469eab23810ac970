"""
Static SVG line chart of waterfall curves

Output is deterministic for fixed inputs: no timestamp metadata and a fixed
hash salt for element ids.
"""

import io
import pathlib
from typing import Mapping, Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from ..models.base import PredictedBand
from .csvio import _atomic_write


def write_waterfall_svg(
    band: PredictedBand,
    path: Union[str, pathlib.Path],
    observed: Optional[Mapping[str, np.ndarray]] = None,
    title: Optional[str] = None,
    cutoff: Optional[float] = None,
) -> pathlib.Path:
    """
    Plot the predicted waterfall, its band and optional observed curves

    Args:
        band: predicted waterfall, with or without bootstrap bounds
        path: output file
        observed: label -> raw % changes, drawn on the same patient-fraction axis
        title: chart title
        cutoff: response threshold drawn as a dashed line
    """
    with plt.rc_context({"svg.hashsalt": "combopredict", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        ax.plot(band.index, band.predicted, color="black", lw=1.5, label="predicted")
        if band.lower is not None and band.upper is not None:
            ax.fill_between(band.index, band.lower, band.upper, color="grey", alpha=0.3, lw=0,
                            label="90% bootstrap band")
        for label, values in (observed or {}).items():
            values = np.sort(np.asarray(values, dtype=float))[::-1]
            ax.plot(np.linspace(0.0, 1.0, values.size), values, lw=1.0, label=label)
        if cutoff is not None:
            ax.axhline(cutoff, color="red", ls="--", lw=0.8)
        ax.set_xlabel("fraction of patients")
        ax.set_ylabel("best % change from baseline")
        ax.set_ylim(-105, None)
        if title:
            ax.set_title(title)
        ax.legend(loc="upper right", fontsize=8)
        fig.tight_layout()

        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
        plt.close(fig)

    return _atomic_write(path, lambda handle: handle.write(buffer.getvalue()))
