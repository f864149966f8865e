"""Preset problem library."""

from levy_expansion.presets.library import PresetLibrary, Problem

__all__ = ["PresetLibrary", "Problem"]
