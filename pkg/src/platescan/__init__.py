"""License plate recognition: deterministic imaging pipeline, vehicle lookup
datastore, HTTP service, and evaluation tooling."""

from .geometry import Rect
from .imaging import (
    IntensityThreshold,
    binarize,
    deskew,
    deslant,
    dilate,
    normalize_glyph,
    otsu_threshold,
    sobel_vertical,
    to_grayscale,
)
from .localization import CandidateRegion, NoPlateFound, localize_plate
from .segmentation import (
    CharacterBox,
    ComponentBox,
    NoCharacters,
    connected_components,
    filter_components,
    order_characters,
    segment_plate,
)
from .recognition import (
    ALPHABET,
    CharacterResult,
    PlateReading,
    Template,
    TemplateSet,
    classify_glyph,
    correlation,
    default_template_path,
    load_templates,
    read_plate,
)
from .pipeline import (
    PipelineConfig,
    RecognitionResult,
    recognize,
    recognize_with_diagnostics,
)
from .datastore import LookupOutcome, Store, VehicleRecord, normalize_plate, open_store

__version__ = "0.1.0"

__all__ = [
    "ALPHABET",
    "CandidateRegion",
    "CharacterBox",
    "CharacterResult",
    "ComponentBox",
    "IntensityThreshold",
    "LookupOutcome",
    "NoCharacters",
    "NoPlateFound",
    "PipelineConfig",
    "PlateReading",
    "RecognitionResult",
    "Rect",
    "Store",
    "Template",
    "TemplateSet",
    "VehicleRecord",
    "binarize",
    "classify_glyph",
    "connected_components",
    "correlation",
    "default_template_path",
    "deskew",
    "deslant",
    "dilate",
    "filter_components",
    "load_templates",
    "localize_plate",
    "normalize_glyph",
    "normalize_plate",
    "open_store",
    "order_characters",
    "otsu_threshold",
    "read_plate",
    "recognize",
    "recognize_with_diagnostics",
    "segment_plate",
    "sobel_vertical",
    "to_grayscale",
]
