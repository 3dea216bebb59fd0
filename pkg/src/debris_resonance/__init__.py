"""Geopotential resonances of space debris."""
