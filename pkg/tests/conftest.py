import numpy as np
import pytest

from platescan.glyphs import GlyphAtlas
from platescan.recognition import default_template_path, load_templates
from platescan.synth import SynthConfig, generate_scene


@pytest.fixture(scope="session")
def templates():
    return load_templates(default_template_path())


@pytest.fixture(scope="session")
def atlas():
    return GlyphAtlas()


@pytest.fixture(scope="session")
def scene_factory(atlas):
    """Deterministic scene generator: scene_factory(seed, **cfg) -> (rgb, truth)."""
    def make(seed: int, **overrides):
        cfg = SynthConfig(count=0, seed=seed, **overrides)
        rng = np.random.default_rng(seed)
        return generate_scene(cfg, rng, atlas, 0)
    return make
