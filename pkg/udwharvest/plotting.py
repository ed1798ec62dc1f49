"""Static PNG figures from sweep tables; written only when output.figure is set."""
import matplotlib
matplotlib.use('Agg')  # headless

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from loguru import logger

FIG_SIZE = (6.0, 4.5)
DPI = 150


def _save(fig, path: str) -> str:
    fig.savefig(path, dpi=DPI, bbox_inches='tight')
    plt.close(fig)
    logger.info(f"Saved figure: {path}")
    return path


def heatmap(table: pd.DataFrame, x: str, y: str, path: str, value: str = 'negativity') -> str:
    """Colour map of `value` over the (x, y) grid of a 2D sweep."""
    grid = table.pivot_table(index=y, columns=x, values=value, aggfunc='first', dropna=False)
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    mesh = ax.pcolormesh(grid.columns.to_numpy(float), grid.index.to_numpy(float),
                         np.ma.masked_invalid(grid.to_numpy(float)), shading='auto', cmap='viridis')
    fig.colorbar(mesh, ax=ax, label=value)
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    return _save(fig, path)


def lines(table: pd.DataFrame, x: str, y: str, path: str, group: str = None, logy: bool = False) -> str:
    """One line per value of `group` (or a single line)."""
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    groups = table.groupby(group, sort=False) if group else [(None, table)]
    for label, part in groups:
        yv = part[y].to_numpy(float)
        if logy:
            yv = np.where(yv > 0, yv, np.nan)
        ax.plot(part[x].to_numpy(float), yv, label=None if label is None else str(label))
    if logy:
        ax.set_yscale('log')
    if group:
        ax.legend(fontsize=8)
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    return _save(fig, path)
