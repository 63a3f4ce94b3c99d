"""Experiment orchestration: persisted runs, collapse checks, figure presets
and the command line interface."""

from .analysis import CollapseReport, collapse_check, standardized_differences
from .figures import FigureRecipe, recipes, render
from .io import load_estimate, save_estimate
from .plots import emit_plot
from .runner import run, run_cached

from ..ensemble import EnsembleSpec
