"""Retinal blood vessel segmentation via automatic trimaps and hierarchical
image matting, with enhancement filters, region features and evaluation."""

from .errors import (ConfigError, FormatError, FovEstimationError,
                     ManifestError, PipelineError, StratificationError,
                     VesselmatError)
from .imgio import (DatasetEntry, DatasetManifest, fov_mask, green_channel,
                    load_dataset, load_image, load_mask)
from .matting import (HierarchySet, SegmentedImage, correlation,
                      hierarchical_update, postprocess, stratify)
from .evaluation import (MetricsRecord, confusion, evaluate_dataset, mean_record,
                      metrics, sweep)
from .morphfilter import (DEFAULT_ANGLES, StructuringElement, default_angles,
                          dilate, erode, linear_se, morph_reconstructed,
                          opening, tophat_directional)
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .regions import (FeatureThresholds, RegionFeatures, connected_components,
                      internal_factor, otsu, region_features)
from .trimap import (BACKGROUND, UNKNOWN, VESSEL, build_trimap,
                     denoise_preliminary, extract_skeleton, partition_by_area,
                     segment_three_way, select_t4, skeleton_threshold)
from .wavelet import (IuwtDecomposition, atrous_kernel, iuwt_decompose,
                      iuwt_enhance)

__version__ = "0.1.0"
