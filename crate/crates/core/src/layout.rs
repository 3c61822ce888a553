//! Weighted partition geometry for sunburst and icicle diagrams.
//!
//! Every node is sized by the number of leaves in its subtree. Intervals are
//! derived from integer leaf offsets, so siblings share their boundaries
//! exactly and the children of a node cover it without gaps.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::str::FromStr;

use thiserror::Error;

use crate::anatomy::{Anatomy, StagedTree};
use crate::id::StructureId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("cannot lay out an empty view")]
    EmptyView,
    #[error("weights do not match the view")]
    WeightMismatch,
    #[error("node {0} is not in the view")]
    UnknownNode(StructureId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagramKind {
    Sunburst,
    Icicle,
}

impl DiagramKind {
    pub fn token(self) -> &'static str {
        match self {
            DiagramKind::Sunburst => "sunburst",
            DiagramKind::Icicle => "icicle",
        }
    }
}

impl FromStr for DiagramKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "sunburst" => Ok(DiagramKind::Sunburst),
            "icicle" => Ok(DiagramKind::Icicle),
            _ => Err(()),
        }
    }
}

/// Subtree leaf counts, aligned with the nodes of the view they came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMap {
    weights: Vec<u64>,
}

impl WeightMap {
    pub fn get(&self, index: usize) -> u64 {
        self.weights[index]
    }

    pub fn of(&self, view: &StagedTree, id: StructureId) -> Option<u64> {
        view.position(id).map(|i| self.weights[i])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Leaves weigh 1, internal nodes the sum of their children.
pub fn compute_weights(view: &StagedTree) -> WeightMap {
    let nodes = view.nodes();
    let mut weights = vec![0u64; nodes.len()];
    for i in (0..nodes.len()).rev() {
        if view.is_leaf(i) {
            weights[i] = 1;
        }
        if let Some(p) = nodes[i].parent {
            weights[p] += weights[i];
        }
    }
    WeightMap { weights }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutParams {
    pub kind: DiagramKind,
    /// Reserve rings/bands for at least this depth.
    pub max_depth_hint: Option<u32>,
    /// Draw the sunburst root as a filled central disc. When false the
    /// center is left as an empty hole one band wide.
    pub root_disc: bool,
}

impl LayoutParams {
    pub fn new(kind: DiagramKind) -> Self {
        LayoutParams { kind, max_depth_hint: None, root_disc: true }
    }
}

/// Angles in radians measured clockwise from 12 o'clock; radii as a
/// fraction of the diagram radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeArc {
    pub id: StructureId,
    pub depth: u32,
    pub start_angle: f64,
    pub end_angle: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl NodeArc {
    pub fn extent(&self) -> f64 {
        self.end_angle - self.start_angle
    }
}

/// Unit-square rectangle; y grows downward from the root band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRect {
    pub id: StructureId,
    pub depth: u32,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Sunburst(Vec<NodeArc>),
    Icicle(Vec<NodeRect>),
}

impl Geometry {
    pub fn kind(&self) -> DiagramKind {
        match self {
            Geometry::Sunburst(_) => DiagramKind::Sunburst,
            Geometry::Icicle(_) => DiagramKind::Icicle,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Geometry::Sunburst(a) => a.len(),
            Geometry::Icicle(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn id(&self, index: usize) -> StructureId {
        match self {
            Geometry::Sunburst(a) => a[index].id,
            Geometry::Icicle(r) => r[index].id,
        }
    }

    /// Share of the root's interval taken by the node at `index`, in [0, 1].
    pub fn fraction(&self, index: usize) -> f64 {
        match self {
            Geometry::Sunburst(a) => a[index].extent() / TAU,
            Geometry::Icicle(r) => r[index].x1 - r[index].x0,
        }
    }

    /// Label anchor in unit-square coordinates (sunburst centered at 0.5, 0.5).
    pub fn centroid(&self, index: usize) -> (f64, f64) {
        match self {
            Geometry::Sunburst(arcs) => {
                let a = &arcs[index];
                if a.inner_radius == 0.0 && a.extent() >= TAU {
                    return (0.5, 0.5);
                }
                let mid = 0.5 * (a.start_angle + a.end_angle);
                let r = 0.5 * (a.inner_radius + a.outer_radius);
                (0.5 + 0.5 * r * libm::sin(mid), 0.5 - 0.5 * r * libm::cos(mid))
            }
            Geometry::Icicle(rects) => {
                let r = &rects[index];
                (0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1))
            }
        }
    }
}

/// Leaf offset of every node: its interval is `[offset, offset + weight)`
/// out of the root's weight.
fn leaf_offsets(view: &StagedTree, weights: &WeightMap) -> Vec<u64> {
    let nodes = view.nodes();
    let mut offset = vec![0u64; nodes.len()];
    let mut next_child = vec![0u64; nodes.len()];
    for (i, n) in nodes.iter().enumerate() {
        if let Some(p) = n.parent {
            offset[i] = offset[p] + next_child[p];
            next_child[p] += weights.get(i);
        }
    }
    offset
}

fn check(view: &StagedTree, weights: &WeightMap) -> Result<(), LayoutError> {
    if view.is_empty() {
        return Err(LayoutError::EmptyView);
    }
    if weights.len() != view.len() {
        return Err(LayoutError::WeightMismatch);
    }
    Ok(())
}

fn band_count(view: &StagedTree, params: &LayoutParams) -> u32 {
    view.max_depth().max(params.max_depth_hint.unwrap_or(0)) + 1
}

pub fn sunburst_layout(view: &StagedTree, weights: &WeightMap, params: &LayoutParams) -> Result<Vec<NodeArc>, LayoutError> {
    check(view, weights)?;
    let offset = leaf_offsets(view, weights);
    let total = weights.get(0) as f64;
    let hole = u32::from(!params.root_disc);
    let bands = f64::from(band_count(view, params) + hole);
    Ok(view
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let lo = offset[i];
            let hi = lo + weights.get(i);
            let ring = n.depth + hole;
            NodeArc {
                id: n.id,
                depth: n.depth,
                start_angle: TAU * (lo as f64 / total),
                end_angle: TAU * (hi as f64 / total),
                inner_radius: f64::from(ring) / bands,
                outer_radius: f64::from(ring + 1) / bands,
            }
        })
        .collect())
}

pub fn icicle_layout(view: &StagedTree, weights: &WeightMap, params: &LayoutParams) -> Result<Vec<NodeRect>, LayoutError> {
    check(view, weights)?;
    let offset = leaf_offsets(view, weights);
    let total = weights.get(0) as f64;
    let bands = f64::from(band_count(view, params));
    Ok(view
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let lo = offset[i];
            let hi = lo + weights.get(i);
            NodeRect {
                id: n.id,
                depth: n.depth,
                x0: lo as f64 / total,
                x1: hi as f64 / total,
                y0: f64::from(n.depth) / bands,
                y1: f64::from(n.depth + 1) / bands,
            }
        })
        .collect())
}

/// Weights and geometry of the requested kind in one step.
pub fn layout(view: &StagedTree, params: &LayoutParams) -> Result<Geometry, LayoutError> {
    let weights = compute_weights(view);
    match params.kind {
        DiagramKind::Sunburst => sunburst_layout(view, &weights, params).map(Geometry::Sunburst),
        DiagramKind::Icicle => icicle_layout(view, &weights, params).map(Geometry::Icicle),
    }
}

/// Zoom by clicking `clicked`: the clicked node's parent becomes the new
/// root. Clicking the root or one of its children leaves the view as is.
pub fn reroot(view: &StagedTree, clicked: StructureId) -> Result<StagedTree, LayoutError> {
    if !view.contains(clicked) {
        return Err(LayoutError::UnknownNode(clicked));
    }
    match view.parent_of(clicked) {
        None => Ok(view.clone()),
        Some(p) if Some(p) == view.root() => Ok(view.clone()),
        Some(p) => view.subtree(p).map_err(|_| LayoutError::UnknownNode(p)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Horizontal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelEntry {
    pub id: StructureId,
    pub text: String,
    pub anchor: (f64, f64),
    pub orientation: Orientation,
}

pub type LabelPlan = Vec<LabelEntry>;

/// Labels for the major systems present in the view only, using the
/// abbreviation when the anatomy has one.
pub fn plan_labels(view: &StagedTree, geometry: &Geometry, anatomy: &Anatomy) -> LabelPlan {
    let structures = anatomy.structures();
    view.nodes()
        .iter()
        .enumerate()
        .filter(|(_, n)| structures[n.anatomy_index].is_major_system)
        .map(|(i, n)| LabelEntry {
            id: n.id,
            text: structures[n.anatomy_index].label().into(),
            anchor: geometry.centroid(i),
            orientation: Orientation::Horizontal,
        })
        .collect()
}

/// Whether an arc needs the SVG large-arc flag.
pub fn is_large_arc(extent: f64) -> bool {
    extent >= PI
}
