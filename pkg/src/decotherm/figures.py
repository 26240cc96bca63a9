"""Figure rendering for the report path.

CSV files are the authoritative artifacts; the SVG figures rendered here
are a convenience view of the same traces. Output is deterministic for a
fixed matplotlib version (fixed hash salt, no embedded date).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_SVG_METADATA = {"Date": None}
plt.rcParams["svg.hashsalt"] = "decotherm"


def render_entropy_production(traces, path) -> None:
    """Local vs global entropy production for a sweep of cutoff frequencies.

    ``traces`` is a list of (cutoff, ThermoTrace) pairs.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, (cutoff, trace) in enumerate(traces):
        color = colors[i % len(colors)]
        ax.plot(
            trace.t, trace.Sigma_gl, color=color,
            label=rf"$\Sigma^{{\rm gl}}$, $\Omega={cutoff:g}$",
        )
        ax.plot(
            trace.t, trace.Sigma_loc, color=color, linestyle="--",
            label=rf"$\Sigma^{{\rm loc}}$, $\Omega={cutoff:g}$",
        )
    ax.set_xlabel(r"$t$")
    ax.set_ylabel(r"entropy production")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata=_SVG_METADATA)
    plt.close(fig)


def render_first_law(trace, path) -> None:
    """First-law quantities per convention: (a) local, (b) elb, (c) lp.

    The local panel shows the internal energy itself (constant for pure
    dephasing); the global panels show its change, which is the quantity
    fixed by the first law there.
    """
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.4), sharex=True)
    panels = [
        ("(a) local", trace.U_loc, trace.W_loc, trace.Q_loc, r"$U$"),
        ("(b) global, interaction counted", trace.U_elb - trace.U_elb[0],
         trace.W_elb, trace.Q_gl, r"$\Delta U$"),
        ("(c) global, bare system energy", trace.U_lp - trace.U_lp[0],
         trace.W_lp, trace.Q_gl, r"$\Delta U$"),
    ]
    for ax, (title, u, w, q, u_label) in zip(axes, panels):
        ax.plot(trace.t, u, label=u_label)
        ax.plot(trace.t, w, linestyle="--", label=r"$W$")
        ax.plot(trace.t, q, linestyle=":", label=r"$Q$")
        ax.set_title(title, fontsize=9)
        ax.set_xlabel(r"$t$")
        ax.legend(fontsize=8)
    axes[0].set_ylabel("energy")
    fig.tight_layout()
    fig.savefig(path, metadata=_SVG_METADATA)
    plt.close(fig)
