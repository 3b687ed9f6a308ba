"""End-to-end single-image pipeline and its configuration.

Stage order: green channel -> FOV resolution -> rim extension -> directional
top-hat enhancement -> wavelet enhancement -> trimap -> hierarchical matting
-> region postprocessing.  The reported wall time spans enhancement through
postprocessing (decoding and FOV handling excluded).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import imgio, matting, morphfilter, trimap as trimap_mod, wavelet
from .errors import ConfigError, PipelineError
from .regions import FeatureThresholds

_FOV_MODES = ("auto", "estimate", "full")
_METRICS = ("euclidean", "chebyshev")


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of the pipeline with its published default."""

    # enhancement
    d: int = 21                                  # line SE length / vessel diameter
    angles: tuple = morphfilter.DEFAULT_ANGLES   # degrees
    iuwt_scales: tuple = (2, 3)
    iuwt_levels: int = 3
    iuwt_residual: bool = False
    # trimap
    p1: float = 0.2
    p2: float = 0.35
    epsilon: float = 0.03
    e1: float = 0.35
    e2: float = 0.25
    r: float = 2.2
    s: float = 0.53
    # matting
    omega: float = 0.5
    window: int = 9
    metric: str = "euclidean"
    gauss_seidel: bool = False
    # field of view
    fov_mode: str = "auto"
    fov_threshold: float = 0.08
    fov_extend_rounds: int = 5
    # ablations / evaluation
    with_skeleton: bool = True
    trimap_only: bool = False
    do_postprocess: bool = True
    full_frame_metrics: bool = False

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        object.__setattr__(self, "iuwt_scales", tuple(int(s) for s in self.iuwt_scales))
        self.validate()

    def validate(self):
        if self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")
        if not self.angles:
            raise ConfigError("angle set must be nonempty")
        if not 0 < self.p1 < self.p2:
            raise ConfigError(f"need 0 < p1 < p2, got p1={self.p1}, p2={self.p2}")
        if not self.iuwt_scales:
            raise ConfigError("iuwt_scales must be nonempty")
        if max(self.iuwt_scales) > self.iuwt_levels:
            raise ConfigError(
                f"iuwt scale {max(self.iuwt_scales)} exceeds levels {self.iuwt_levels}"
            )
        if self.e1 <= 0 or self.e2 <= 0:
            raise ConfigError(f"extent thresholds must be positive, got "
                              f"e1={self.e1}, e2={self.e2}")
        if self.r <= 0 or self.s <= 0:
            raise ConfigError("r and s must be positive")
        if self.window < 3 or self.window % 2 == 0:
            raise ConfigError(f"window must be odd and >= 3, got {self.window}")
        if self.metric not in _METRICS:
            raise ConfigError(f"metric must be one of {_METRICS}, got {self.metric!r}")
        if self.fov_mode not in _FOV_MODES:
            raise ConfigError(f"fov_mode must be one of {_FOV_MODES}")
        if self.epsilon < 0 or self.omega < 0:
            raise ConfigError("epsilon and omega must be >= 0")

    def with_overrides(self, **kwargs):
        """Copy with updated fields; unknown names are rejected."""
        known = {f.name for f in fields(self)}
        unknown = set(kwargs) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return replace(self, **kwargs)

    def feature_thresholds(self, height, width):
        return FeatureThresholds.for_image(
            height, width, d=self.d, e1=self.e1, e2=self.e2, r=self.r, s=self.s
        )

    # -- plain-text round trip ------------------------------------------------

    def to_text(self):
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(f"{v:g}" if isinstance(v, float) else str(v)
                                 for v in value)
            lines.append(f"{f.name}={value}")
        return "\n".join(lines) + "\n"

    def to_file(self, path):
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text):
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise ConfigError(f"line {lineno}: unknown config key {key!r}")
            kwargs[key] = _parse_field(known[key], value)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path):
        return cls.from_text(Path(path).read_text())


def _parse_field(f, value):
    default = f.default
    if f.name == "angles":
        return tuple(float(v) for v in value.split(",") if v.strip())
    if f.name == "iuwt_scales":
        return tuple(int(v) for v in value.split(",") if v.strip())
    if isinstance(default, bool):
        lowered = value.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ConfigError(f"cannot parse boolean {f.name}={value!r}")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


@dataclass
class PipelineResult:
    mask: np.ndarray          # final vessel mask
    trimap: np.ndarray        # uint8 trimap labels
    i_mr: np.ndarray          # top-hat enhanced image
    i_iuw: np.ndarray         # wavelet enhanced image
    fov: np.ndarray           # field-of-view mask used
    seconds: float            # enhancement through postprocessing
    unresolved: int           # unknown pixels defaulted to background


def _stage(name):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, PipelineError):
                raise PipelineError(name, exc) from exc
            return False

    return _Ctx()


def resolve_fov(rgb, config, provided=None):
    """Pick the FOV mask according to the configured mode."""
    if config.fov_mode == "full":
        return np.ones(rgb.shape[:2], bool)
    if config.fov_mode == "auto" and provided is not None:
        return imgio.fov_mask(rgb, provided=provided)
    return imgio.fov_mask(rgb, threshold=config.fov_threshold)


def run_pipeline(rgb, config=None, fov=None):
    """Segment one fundus image; ``fov`` may carry a dataset-provided mask."""
    config = config or PipelineConfig()
    rgb = np.asarray(rgb)
    with _stage("fov"):
        fov_used = resolve_fov(rgb, config, provided=fov)
    with _stage("green-channel"):
        gray = imgio.green_channel(rgb)
        gray = imgio.extend_outside_fov(gray, fov_used, config.fov_extend_rounds)
    started = time.perf_counter()
    with _stage("tophat-enhancement"):
        i_mr = morphfilter.morph_reconstructed(gray, config.angles, config.d)
    with _stage("wavelet-enhancement"):
        i_iuw = wavelet.iuwt_enhance(
            gray, config.iuwt_scales, config.iuwt_levels,
            include_residual=config.iuwt_residual,
        )
    with _stage("trimap"):
        thresholds = config.feature_thresholds(*rgb.shape[:2])
        tm = trimap_mod.build_trimap(
            i_mr, i_iuw, fov_used, thresholds,
            p1=config.p1, p2=config.p2, epsilon=config.epsilon,
            with_skeleton=config.with_skeleton,
        )
    with _stage("matting"):
        if config.trimap_only:
            seg = matting.SegmentedImage(tm == trimap_mod.VESSEL, 0)
        else:
            seg = matting.hierarchical_update(
                tm, i_mr, window=config.window, omega=config.omega,
                metric=config.metric, gauss_seidel=config.gauss_seidel,
            )
    with _stage("postprocess"):
        if config.do_postprocess:
            seg = matting.postprocess(seg, thresholds)
    seconds = time.perf_counter() - started
    return PipelineResult(seg.vessel, tm, i_mr, i_iuw, fov_used, seconds,
                          seg.unresolved)
