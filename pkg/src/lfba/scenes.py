"""Synthetic room, occupant, and ceiling camera.

Renders 64x64 grayscale frames of a schematic office: fixed furniture
(piano, sofa, desk with monitor, mirror, door) plus an occupant blob whose
position and shape identify the scene class.  Collection runs model a change
of clothing: a run-dependent multiplicative texture on the occupant pixels
only, with furniture invariant across runs.  Frame features are the 8x8
block means of the raster.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .codec import ControlVector, encode_label, parse_bits
from .dataset import Dataset, SampleRecord

IMAGE_SIZE = 64
BLOCK = 8
FEATURE_DIM = (IMAGE_SIZE // BLOCK) ** 2

DEFAULT_RUNS = 5
DEFAULT_SCALE = 0.056


@dataclass(frozen=True)
class SceneEntry:
    """One catalog scene: identifier, description, preferred control, shot count."""

    id: str
    description: str
    preferred_output: ControlVector
    shots: int


def _entry(scene_id: str, description: str, bits: str, shots: int) -> SceneEntry:
    return SceneEntry(
        id=scene_id,
        description=description,
        preferred_output=ControlVector(bits=parse_bits(bits).bits),
        shots=shots,
    )


_CATALOG: Tuple[SceneEntry, ...] = (
    _entry("A00", "No one is there.", "0000", 1468),
    _entry("A10", "Walking or standing.", "0010", 3567),
    _entry("A11", "Standing in front of the mirror.", "1111", 344),
    _entry("A20", "Just sitting on a chair.", "0010", 1309),
    _entry("A21", "Sitting on a chair reading papers.", "0011", 1890),
    _entry("A22", "Sitting on a chair with a computer.", "0011", 2306),
    _entry("A23", "Sitting on a chair using a monitor.", "0001", 2170),
    _entry("A30", "Just sitting on the sofa.", "0110", 1091),
    _entry("A31", "Sitting on the sofa reading papers.", "0100", 1366),
    _entry("A32", "Lying down on the sofa.", "0000", 971),
    _entry("A40", "Sitting in front of the piano.", "1010", 474),
    _entry("A41", "About to start playing the piano.", "1000", 333),
    _entry("A42", "Playing the piano.", "1000", 549),
)


def catalog() -> List[SceneEntry]:
    """The 13 scene classes with their preferred outputs and shot counts."""
    return list(_CATALOG)


def catalog_by_id() -> Dict[str, SceneEntry]:
    return {entry.id: entry for entry in _CATALOG}


@dataclass(frozen=True)
class GeneratorConfig:
    """Rendering knobs: noise level, clothing-texture strength, position jitter."""

    seed: int = 0
    pixel_noise_sigma: float = 0.05
    run_effect_strength: float = 0.25
    class_jitter: int = 2

    def __post_init__(self):
        if self.pixel_noise_sigma < 0:
            raise ValueError("pixel_noise_sigma must be >= 0")
        if not (0.0 <= self.run_effect_strength <= 1.0):
            raise ValueError("run_effect_strength must be in [0, 1]")
        if self.class_jitter < 0:
            raise ValueError("class_jitter must be >= 0")


@dataclass(frozen=True)
class SceneFrame:
    """One camera observation: raster, derived features, provenance."""

    image: np.ndarray
    features: np.ndarray
    scene: str
    run: int
    timestamp: float


# Semantic zones of the room (y0, y1, x0, x1), half-open; used by tests and the
# panel to place glyphs.  Zones may overlap and need not tile the floor.
ROOM_ZONES: Dict[str, Tuple[int, int, int, int]] = {
    "piano": (2, 28, 2, 24),
    "mirror": (2, 20, 40, 63),
    "desk": (24, 42, 36, 63),
    "sofa": (40, 62, 2, 30),
    "door": (52, 63, 42, 62),
}

# Night-vision look: near-black floor, faint fixture outlines, bright people
# and props.  Shared structure carries almost no feature energy, so what the
# classifier sees is dominated by what actually differs between activities.
_FLOOR = 0.03
_WALL = 0.02

# Drawn furniture rectangles: (y0, y1, x0, x1, intensity).  Invariant across
# runs and scenes.
_FURNITURE: Tuple[Tuple[int, int, int, int, float], ...] = (
    (4, 14, 4, 20, 0.10),    # piano body, lid closed
    (2, 16, 52, 62, 0.15),   # mirror
    (46, 58, 4, 26, 0.12),   # sofa
    (30, 40, 46, 62, 0.13),  # desk
    (26, 32, 50, 60, 0.05),  # monitor, dark when off
    (56, 62, 46, 60, 0.08),  # door
)


@dataclass(frozen=True)
class _Occupant:
    cy: int
    cx: int
    ry: int
    rx: int
    intensity: float = 0.95


@dataclass(frozen=True)
class _SceneLayout:
    occupant: Optional[_Occupant]
    # Scene-specific props (papers, laptop, lit monitor, ...), run-invariant.
    props: Tuple[Tuple[int, int, int, int, float], ...] = field(default_factory=tuple)


# Activities that share a control output may share appearance freely; the
# geometry only has to keep activities with DIFFERENT outputs apart.  Most
# outputs get a prop territory no other output touches, block-scale and high
# contrast, so the distinction survives block averaging, position jitter, and
# the per-run clothing texture (which touches the occupant only, never the
# props).  The deliberate exception is the work table, where outputs 2 and 3
# share one prop and differ only in how much floor the pose covers; that
# footprint rides the clothing texture, so a model scored on runs it was
# trained on has an easier time there than one scored on an unseen run.
_LAYOUTS: Dict[str, _SceneLayout] = {
    # empty room: the hallway door stands ajar, light spilling through
    "A00": _SceneLayout(
        occupant=None,
        props=((52, 63, 42, 62, 0.93),),
    ),
    # crossing the room past the work table, compact upright silhouette
    "A10": _SceneLayout(
        occupant=_Occupant(20, 22, 3, 3),
        props=((24, 32, 16, 40, 0.90),),
    ),
    # standing at the mirror with the full-height vanity strip lit
    "A11": _SceneLayout(
        occupant=_Occupant(10, 45, 6, 4),
        props=((0, 24, 40, 64, 0.95),),
    ),
    # paused beside the work table, same stance as A10 further along
    "A20": _SceneLayout(
        occupant=_Occupant(20, 30, 3, 3),
        props=((24, 32, 16, 40, 0.90),),
    ),
    # leaning across the table sorting papers, pose spreads wide
    "A21": _SceneLayout(
        occupant=_Occupant(20, 26, 4, 5),
        props=((24, 32, 16, 40, 0.90),),
    ),
    # spread over the table working on the laptop, same wide pose
    "A22": _SceneLayout(
        occupant=_Occupant(20, 33, 4, 5),
        props=((24, 32, 16, 40, 0.90),),
    ),
    # upright at the desk facing the lit monitor, glow on the cabinet
    "A23": _SceneLayout(
        occupant=_Occupant(33, 46, 5, 3),
        props=((24, 32, 48, 62, 0.98), (32, 36, 50, 60, 0.55)),
    ),
    # sitting on the sofa under the reading lamp's pool of light
    "A30": _SceneLayout(
        occupant=_Occupant(43, 8, 2, 5),
        props=((40, 48, 0, 16, 0.85),),
    ),
    # sitting mid-sofa, papers held up bright over the lap
    "A31": _SceneLayout(
        occupant=_Occupant(44, 24, 2, 6),
        props=((40, 48, 16, 32, 0.96),),
    ),
    # stretched out asleep, blanket draped over the sofa's front edge
    "A32": _SceneLayout(
        occupant=_Occupant(55, 17, 3, 8),
        props=((52, 60, 18, 28, 0.85),),
    ),
    # standing at the tall corner lamp, wall and bench washed in light
    "A40": _SceneLayout(
        occupant=_Occupant(24, 4, 5, 2),
        props=((0, 16, 0, 8, 0.95), (16, 40, 0, 8, 0.92), (32, 40, 8, 16, 0.92)),
    ),
    # piano lid up, bright inner frame showing, player settling in
    "A41": _SceneLayout(
        occupant=_Occupant(19, 16, 4, 3),
        props=((2, 14, 8, 24, 0.92),),
    ),
    # lid up, leaning into the keys, sheet music lit on the stand
    "A42": _SceneLayout(
        occupant=_Occupant(17, 16, 4, 4),
        props=((2, 14, 8, 24, 0.92), (10, 16, 8, 26, 0.98)),
    ),
}


def features_from_image(image: np.ndarray) -> np.ndarray:
    """Row-major 8x8 block means of a 64x64 image."""
    if image.shape != (IMAGE_SIZE, IMAGE_SIZE):
        raise ValueError(f"expected {IMAGE_SIZE}x{IMAGE_SIZE} image, got {image.shape}")
    blocks = image.reshape(BLOCK, IMAGE_SIZE // BLOCK, BLOCK, IMAGE_SIZE // BLOCK)
    return blocks.mean(axis=(1, 3)).reshape(-1)


def _base_canvas() -> np.ndarray:
    img = np.full((IMAGE_SIZE, IMAGE_SIZE), _FLOOR)
    img[:2, :] = _WALL
    img[-2:, :] = _WALL
    img[:, :2] = _WALL
    img[:, -2:] = _WALL
    for y0, y1, x0, x1, v in _FURNITURE:
        img[y0:y1, x0:x1] = v
    return img


def _run_texture(run: int, strength: float) -> np.ndarray:
    """Clothing analogue: a striped multiplier field, fixed per run."""
    ys, xs = np.mgrid[0:IMAGE_SIZE, 0:IMAGE_SIZE]
    theta = 2.39996322972865 * run  # golden angle spreads orientations
    g = np.cos(theta) * xs + np.sin(theta) * ys
    pattern = np.sin(2.0 * np.pi * g / 11.0 + 2.1 * run)
    return 1.0 + strength * pattern


def render_expectation(scene_id: str, run: int, strength: float = 0.25) -> np.ndarray:
    """Noise-free, jitter-free render: the expectation image of a scene/run."""
    layout = _LAYOUTS.get(scene_id)
    if layout is None:
        raise ValueError(f"unknown scene id {scene_id!r}")
    img = _base_canvas()
    for y0, y1, x0, x1, v in layout.props:
        img[y0:y1, x0:x1] = v
    occ = layout.occupant
    if occ is not None:
        ys, xs = np.mgrid[0:IMAGE_SIZE, 0:IMAGE_SIZE]
        mask = ((ys - occ.cy) / occ.ry) ** 2 + ((xs - occ.cx) / occ.rx) ** 2 <= 1.0
        img[mask] = occ.intensity
        img[mask] *= _run_texture(run, strength)[mask]
    return np.clip(img, 0.0, 1.0)


def render_frame(
    scene_id: str,
    run: int,
    config: GeneratorConfig,
    draw: np.random.Generator,
    timestamp: float = 0.0,
) -> SceneFrame:
    """Render one frame: fixed layout, jittered occupant, run texture, pixel noise.

    Deterministic given (scene, run, config, draw-stream position).  Draws from
    `draw` only for the randomness actually enabled, so zero-jitter zero-noise
    renders are draw-independent.
    """
    layout = _LAYOUTS.get(scene_id)
    if layout is None:
        raise ValueError(f"unknown scene id {scene_id!r}")
    if run < 1:
        raise ValueError(f"run index must be >= 1, got {run}")
    img = _base_canvas()
    for y0, y1, x0, x1, v in layout.props:
        img[y0:y1, x0:x1] = v
    occ = layout.occupant
    if occ is not None:
        cy, cx = occ.cy, occ.cx
        if config.class_jitter > 0:
            j = config.class_jitter
            cy += int(draw.integers(-j, j + 1))
            cx += int(draw.integers(-j, j + 1))
        ys, xs = np.mgrid[0:IMAGE_SIZE, 0:IMAGE_SIZE]
        mask = ((ys - cy) / occ.ry) ** 2 + ((xs - cx) / occ.rx) ** 2 <= 1.0
        img[mask] = occ.intensity
        img[mask] *= _run_texture(run, config.run_effect_strength)[mask]
    if config.pixel_noise_sigma > 0:
        img = img + draw.normal(0.0, config.pixel_noise_sigma, size=img.shape)
    img = np.clip(img, 0.0, 1.0)
    return SceneFrame(
        image=img,
        features=features_from_image(img),
        scene=scene_id,
        run=run,
        timestamp=timestamp,
    )


def sample_stream(seed: int, scene_id: str, run: int, index: int) -> np.random.Generator:
    """Independent RNG stream for one (scene, run, sample) draw."""
    scene_index = next(i for i, e in enumerate(_CATALOG) if e.id == scene_id)
    return np.random.default_rng([seed, scene_index, run, index])


def generate_dataset(
    runs: int = DEFAULT_RUNS,
    scale: float = DEFAULT_SCALE,
    config: GeneratorConfig = GeneratorConfig(),
) -> Dataset:
    """Emit a labeled dataset proportional to the catalog shot counts.

    Per run and scene, round(shots * scale / runs) samples labeled with the
    scene's preferred output.  Bit-identical for identical (seed, runs, scale).
    """
    if runs < 2:
        raise ValueError("need at least 2 runs for cross-run evaluation")
    if not (0.0 < scale <= 1.0):
        raise ValueError(f"scale must be in (0, 1], got {scale}")
    per_scene = {}
    for entry in _CATALOG:
        count = round(entry.shots * scale / runs)
        if count == 0:
            raise ValueError(
                f"scale {scale} yields zero samples for scene {entry.id}; folds would degenerate"
            )
        per_scene[entry.id] = count
    ds = Dataset(n=4, d=FEATURE_DIM)
    tick = 0
    for run in range(1, runs + 1):
        for entry in _CATALOG:
            label = encode_label(parse_bits(str(entry.preferred_output)))
            for index in range(per_scene[entry.id]):
                frame = render_frame(
                    entry.id,
                    run,
                    config,
                    sample_stream(config.seed, entry.id, run, index),
                    timestamp=float(tick),
                )
                ds.append(
                    SampleRecord(
                        features=frame.features,
                        label=label.value,
                        label_bits=str(entry.preferred_output),
                        run=run,
                        timestamp=float(tick),
                        source="synthetic",
                        scene=entry.id,
                    )
                )
                tick += 1
    return ds
