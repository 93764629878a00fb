import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from torsionlab.polytope import lambda_table  # noqa: E402
from torsionlab.scenes import moment_curve_scene, power2d_scene  # noqa: E402
from torsionlab.torsion import torsion_profile  # noqa: E402


@pytest.fixture(scope="session")
def moment2():
    scene = moment_curve_scene(2)
    table = scene.word_table()
    return {
        "scene": scene,
        "table": table,
        "entries": lambda_table(table),
        "profile": torsion_profile(table, scene.beta),
    }


@pytest.fixture(scope="session")
def moment3():
    scene = moment_curve_scene(3)
    table = scene.word_table()
    return {
        "scene": scene,
        "table": table,
        "entries": lambda_table(table),
        "profile": torsion_profile(table, scene.beta),
    }


@pytest.fixture(scope="session")
def power2d_k2():
    scene = power2d_scene(2)
    table = scene.word_table()
    return {
        "scene": scene,
        "table": table,
        "entries": lambda_table(table),
        "profile": torsion_profile(table, scene.beta),
    }
