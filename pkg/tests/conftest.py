"""Shared fixtures: stock loop pair and idealized identical-loop links."""

import math

import pytest

from wptlink.geometry import LoopGeometry, Placement
from wptlink.link_model import Link, Resonator
from wptlink.presets import load_config, loop_geometry_from, resonator_from
from wptlink.tuner import SystemConfig

# Stock loop circuit values (the shipped preset).
LOOP1 = Resonator(r=0.23, l=0.596e-6, c=30.6e-12)
LOOP2 = Resonator(r=0.20, l=0.583e-6, c=31.1e-12)
RADIUS = 0.107

# Identical-loop idealization used by the closed-form examples.
IDEAL = Resonator(r=0.2, l=0.59e-6, c=30.85e-12)


@pytest.fixture(scope="session")
def config():
    return load_config()


@pytest.fixture(scope="session")
def stock_system(config):
    return SystemConfig(
        loop1=(resonator_from(config, "loop1"), loop_geometry_from(config, "loop1")),
        loop2=(resonator_from(config, "loop2"), loop_geometry_from(config, "loop2")),
        placement=Placement(0.20),
    )


@pytest.fixture(scope="session")
def omega_design(config):
    return 2.0 * math.pi * config["frequency_design_hz"]


def ideal_link(m12: float) -> Link:
    return Link(IDEAL, IDEAL, m12)


def bare_system(res: Resonator, m12_placeholder_d: float, rl: float) -> SystemConfig:
    """Feedline-free identical pair terminated in equal real impedances."""
    geo = LoopGeometry(radius=RADIUS, feed_length=0.0)
    return SystemConfig(
        loop1=(res, geo),
        loop2=(res, geo),
        placement=Placement(m12_placeholder_d),
        z_source=rl,
        z_load=rl,
    )
