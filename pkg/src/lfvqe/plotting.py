"""Figure rendering for minimization traces and form-factor scans.

Figures are written straight to files (Agg backend), one per report, next
to the delimited output the CLI produces.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .observables import ScanPoint
from .vqe import VQETrace


def save_trace_plot(trace: VQETrace, path, exact_energy: float | None = None,
                    units: str = "") -> None:
    """Energy estimate per iteration, with shot-noise bars when present."""
    iterations = [rec.index for rec in trace.iterations]
    energies = [rec.energy.value for rec in trace.iterations]
    errors = [rec.energy.std_error for rec in trace.iterations]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if any(e > 0 for e in errors):
        ax.errorbar(iterations, energies, yerr=errors, fmt="o-", ms=3,
                    lw=1, capsize=2, label="estimated energy")
    else:
        ax.plot(iterations, energies, "o-", ms=3, lw=1, label="energy")
    if exact_energy is not None:
        ax.axhline(exact_energy, color="k", ls="--", lw=1, label="exact minimum")
    ax.set_xlabel("iteration")
    ylabel = "energy" + (f" [{units}]" if units else "")
    ax.set_ylabel(ylabel)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_scan_plot(points: Sequence[ScanPoint], path, name: str = "form factor") -> None:
    """F(Q^2) with error bars over the scan grid."""
    q2 = [p.q2_gev2 for p in points]
    values = [p.value for p in points]
    errors = [p.std_error for p in points]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.errorbar(q2, values, yerr=errors, fmt="s-", ms=4, lw=1, capsize=2)
    ax.set_xlabel(r"$Q^2$ [GeV$^2$]")
    ax.set_ylabel(name)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
