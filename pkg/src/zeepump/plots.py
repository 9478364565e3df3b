"""Matplotlib renderers for the CLI report path (files only, Agg backend)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_branching_curve(rows, path, optimum=None):
    rows = np.asarray(rows, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(rows[:, 0], rows[:, 1], "-", color="tab:blue")
    if optimum is not None:
        ax.plot([optimum[0]], [optimum[1]], "o", color="tab:red",
                label=f"max {optimum[1]:.3f} at {optimum[0]:.1f} deg")
        ax.legend()
    ax.set_xlabel("field angle theta (deg)")
    ax.set_ylabel("branching ratio R_par")
    ax.grid(alpha=0.3)
    _finish(fig, path)


def plot_spectrum(spectrum, path, title=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(spectrum.frequency_ghz, spectrum.depth, "-", color="tab:blue")
    ax.set_xlabel("frequency offset (GHz)")
    ax.set_ylabel("absorption depth d")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    _finish(fig, path)


def plot_phi_scan(phi_deg, depth_ad, depth_bc, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(phi_deg, depth_bc, "s-", ms=3, color="tab:blue", label="inner pair (b, c)")
    ax.plot(phi_deg, depth_ad, "o-", ms=3, color="tab:orange", label="outer pair (a, d)")
    ax.set_xlabel("polarization angle phi (deg)")
    ax.set_ylabel("absorption depth d")
    ax.legend()
    ax.grid(alpha=0.3)
    _finish(fig, path)


def plot_fit(x, y, model_x, model_y, path, xlabel, ylabel):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, y, ".", ms=3, color="0.4", label="data")
    ax.plot(model_x, model_y, "-", color="tab:red", label="fit")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    ax.grid(alpha=0.3)
    _finish(fig, path)


def plot_hole(hole, antihole, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    f_mhz = hole.frequency_ghz * 1e3
    ax.plot(f_mhz, hole.depth, "-", color="tab:blue", label="pumped line")
    ax.plot(antihole.frequency_ghz * 1e3, antihole.depth, "-",
            color="tab:orange", label="partner line")
    ax.axhline(hole.metadata.get("unpumped_depth", np.nan), ls=":", color="0.6",
               label="before pumping")
    ax.set_xlabel("offset from pumped line (MHz)")
    ax.set_ylabel("absorption depth d")
    ax.legend()
    ax.grid(alpha=0.3)
    _finish(fig, path)


def plot_recovery(delays_ms, fractions, path, fit_curve=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(delays_ms, 100 * np.asarray(fractions), "o", ms=4, color="tab:blue",
                label="simulated")
    if fit_curve is not None:
        ax.semilogx(fit_curve[0], 100 * np.asarray(fit_curve[1]), "-", color="tab:red",
                    label="exponential fit")
    ax.set_xlabel("delay after pump (ms)")
    ax.set_ylabel("remaining fraction of pumped level (%)")
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    _finish(fig, path)
