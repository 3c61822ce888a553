//! Core model and algorithms for visualizing developmental gene expression
//! over an anatomy `partOf` tree.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, SVG output,
//! the HTTP service and the command line live in the `atlasburst` crate.
//!
//! The pieces, bottom-up:
//!
//! * [`id`]: structure identifiers, Theiler stage numbers and stage sets.
//! * [`anatomy`]: the abstract anatomy tree, its validation, and the staged
//!   and abstract views derived from it.
//! * [`expression`]: textual annotations, propagation of positive
//!   expression up the tree, profiles and profile containment.
//! * [`layout`]: leaf-count weighting, sunburst and icicle partition
//!   geometry, re-rooting zoom and label plans.
//! * [`compose`]: palette and render models joining geometry with
//!   expression state, plus multi-diagram grids.
//! * [`cloud`]: the per-stage gene cloud used to build queries.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod anatomy;
pub mod cloud;
pub mod compose;
pub mod expression;
pub mod id;
pub mod layout;

pub use anatomy::{
    Anatomy, AnatomyError, Finding, FindingRule, Severity, StagedTree, Structure, StructureRecord,
    TreeNode, ValidationReport,
};
pub use cloud::{build_cloud, cloud_layout, search_prefix, CloudError, CloudModel, CloudNode, Selection};
pub use compose::{
    compose_diagram, compose_grid, compose_grid_with, compose_with_geometry, compose_with_states,
    Color, ComposeError, Grid, GridPlacement, GridSpec, Palette, RenderModel, RenderNode,
    StateClass,
};
pub use expression::{
    expression_profile, profile_subset, propagate_in_view, propagate_states, view_for,
    Annotation, AnnotationStore, Conflict, ExpressionError, ExpressionState, GeneSymbol, Level,
    StateMap, SubsetResult, ViewMode,
};
pub use id::{IdError, Namespace, StageNumber, StageSet, StructureId, STAGE_COUNT};
pub use layout::{
    compute_weights, icicle_layout, layout, plan_labels, reroot, sunburst_layout,
    DiagramKind, Geometry, LabelEntry, LabelPlan, LayoutError, LayoutParams, NodeArc, NodeRect, Orientation,
    WeightMap,
};
