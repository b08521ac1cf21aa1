"""splatlift: lift posed 2D segmentation masks onto 3D Gaussian splat scenes.

The pipeline: accumulate per-(label, Gaussian) blend mass over masked
views, solve the label assignment in closed form (optionally biased
toward background), then render novel-view masks or export object-removed
scenes.
"""

from .contributions import (
    ContributionMatrix,
    LabelMask,
    accumulate_contributions,
)
from .editing import extract_subset, remove_objects
from .maskrender import (
    DEFAULT_TAU,
    RenderedMask,
    render_binary_mask,
    render_scene_mask,
)
from .masks import load_mask_png, save_mask_png, save_mask_preview
from .metrics import EvalReport, evaluate_mask_dirs, mask_scores
from .ply import export_ply, load_scene_ply
from .prompts import (
    PointPrompt,
    PropagatedPrompt,
    backproject_prompt,
    project_prompts_to_views,
)
from .rasterizer import (
    BlendConfig,
    DEFAULT_BLEND,
    EXACT_BLEND,
    RenderOutput,
    TileBinning,
    bin_gaussians_to_tiles,
    render_property,
    render_subset_alpha_depth,
    render_view,
)
from .reference import reference_pixel_weights, reference_render
from .scene import (
    CameraView,
    Gaussian,
    GaussianScene,
    ProjectedGaussian,
    SceneDataError,
    SceneFormatError,
    evaluate_alpha,
    load_cameras,
    project_gaussian,
    project_scene,
    save_cameras,
)
from .solver import (
    Assignment,
    assign_binary,
    assign_scene,
    brute_force_oracle,
    objective_value,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BlendConfig",
    "CameraView",
    "ContributionMatrix",
    "DEFAULT_BLEND",
    "DEFAULT_TAU",
    "EXACT_BLEND",
    "EvalReport",
    "Gaussian",
    "GaussianScene",
    "LabelMask",
    "PointPrompt",
    "PropagatedPrompt",
    "ProjectedGaussian",
    "RenderOutput",
    "RenderedMask",
    "SceneDataError",
    "SceneFormatError",
    "TileBinning",
    "accumulate_contributions",
    "assign_binary",
    "assign_scene",
    "backproject_prompt",
    "bin_gaussians_to_tiles",
    "brute_force_oracle",
    "evaluate_alpha",
    "evaluate_mask_dirs",
    "export_ply",
    "extract_subset",
    "load_cameras",
    "load_mask_png",
    "load_scene_ply",
    "mask_scores",
    "objective_value",
    "project_gaussian",
    "project_prompts_to_views",
    "project_scene",
    "reference_pixel_weights",
    "reference_render",
    "remove_objects",
    "render_binary_mask",
    "render_property",
    "render_scene_mask",
    "render_subset_alpha_depth",
    "render_view",
    "save_cameras",
    "save_mask_png",
    "save_mask_preview",
]
