"""Machine construction toolkit: fragments, cores, templates, interpreter."""

from .base import (
    BuildError,
    MachineFragment,
    MalformedRegionError,
    TokenView,
    as_fraction,
    separator_spans,
    token_view,
    tuned_rounds,
)
from .cores import (
    build_eq_core,
    build_pal_check,
    build_pal_core,
    build_rw_gate,
    build_same_length,
    build_twice_as_long,
    counter_profile,
)
from .orchestra import interpret
from .templates import compile_pppal, compile_rpal

__all__ = [
    "BuildError",
    "MachineFragment",
    "MalformedRegionError",
    "TokenView",
    "as_fraction",
    "build_eq_core",
    "build_pal_check",
    "build_pal_core",
    "build_rw_gate",
    "build_same_length",
    "build_twice_as_long",
    "compile_pppal",
    "compile_rpal",
    "counter_profile",
    "interpret",
    "separator_spans",
    "token_view",
    "tuned_rounds",
]
