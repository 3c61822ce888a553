//! Render models: geometry joined with expression state, colors, hover
//! text and labels, one per (gene, stage) diagram.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::borrow::Borrow;
use core::str::FromStr;

use thiserror::Error;

use crate::anatomy::{Anatomy, StagedTree};
use crate::expression::{
    propagate_in_view, view_for, AnnotationStore, ExpressionState, GeneSymbol, Level, StateMap, ViewMode,
};
use crate::id::{StageNumber, StructureId};
use crate::layout::{layout, plan_labels, DiagramKind, Geometry, LabelPlan, LayoutError, LayoutParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("grid has no cells")]
    EmptyGrid,
    #[error("grid needs at least one column")]
    NoColumns,
    #[error("{0:?} is not a #RRGGBB color")]
    BadHex(String),
    #[error("unknown state class {0:?}")]
    UnknownClass(String),
}

/// The color classes a node can be filled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateClass {
    Strong,
    Moderate,
    Weak,
    Present,
    NotDetected,
    Propagated,
    NoInfo,
    NotPresent,
}

impl StateClass {
    pub const ALL: [StateClass; 8] = [
        StateClass::Strong,
        StateClass::Moderate,
        StateClass::Weak,
        StateClass::Present,
        StateClass::NotDetected,
        StateClass::Propagated,
        StateClass::NoInfo,
        StateClass::NotPresent,
    ];

    pub fn of(state: ExpressionState) -> StateClass {
        match state {
            ExpressionState::Direct(Level::Strong) => StateClass::Strong,
            ExpressionState::Direct(Level::Moderate) => StateClass::Moderate,
            ExpressionState::Direct(Level::Weak) => StateClass::Weak,
            ExpressionState::Direct(Level::Present) => StateClass::Present,
            ExpressionState::Direct(Level::NotDetected) => StateClass::NotDetected,
            ExpressionState::Propagated => StateClass::Propagated,
            ExpressionState::NoInfo => StateClass::NoInfo,
            ExpressionState::NotPresent => StateClass::NotPresent,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            StateClass::Strong => "strong",
            StateClass::Moderate => "moderate",
            StateClass::Weak => "weak",
            StateClass::Present => "present",
            StateClass::NotDetected => "not_detected",
            StateClass::Propagated => "propagated",
            StateClass::NoInfo => "no_info",
            StateClass::NotPresent => "not_present",
        }
    }

    /// Shown in hover text after the structure name.
    pub fn describe(self) -> &'static str {
        match self {
            StateClass::NotDetected => "not detected",
            StateClass::NoInfo => "no data",
            StateClass::NotPresent => "not present",
            other => other.token(),
        }
    }

    /// Positive directly or by propagation; drawn in a non-grey color.
    pub fn is_positive(self) -> bool {
        !matches!(self, StateClass::NotDetected | StateClass::NoInfo | StateClass::NotPresent)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for StateClass {
    type Err = ComposeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StateClass::ALL
            .into_iter()
            .find(|c| c.token() == s)
            .ok_or_else(|| ComposeError::UnknownClass(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Color {
    pub name: String,
    pub hex: String,
}

fn is_hex_color(s: &str) -> bool {
    s.len() == 7 && s.starts_with('#') && s[1..].bytes().all(|b| b.is_ascii_hexdigit())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    colors: [Color; 8],
}

impl Default for Palette {
    fn default() -> Self {
        let c = |name: &str, hex: &str| Color { name: name.into(), hex: hex.into() };
        Palette {
            colors: [
                c("red", "#d62728"),
                c("yellow", "#ffd700"),
                c("purple", "#9467bd"),
                c("orange", "#ff7f0e"),
                c("cyan", "#17becf"),
                c("pink", "#f7b6d2"),
                c("grey", "#9e9e9e"),
                c("light grey", "#e0e0e0"),
            ],
        }
    }
}

impl Palette {
    /// The default palette with some classes recolored. Overridden entries
    /// take their hex string as their name.
    pub fn with_overrides<'a>(overrides: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Palette, ComposeError> {
        let mut palette = Palette::default();
        for (class, hex) in overrides {
            let class: StateClass = class.parse()?;
            if !is_hex_color(hex) {
                return Err(ComposeError::BadHex(hex.into()));
            }
            let hex = hex.to_ascii_lowercase();
            palette.colors[class.index()] = Color { name: hex.clone(), hex };
        }
        Ok(palette)
    }

    pub fn get(&self, class: StateClass) -> &Color {
        &self.colors[class.index()]
    }

    pub fn color_of(&self, state: ExpressionState) -> &Color {
        self.get(StateClass::of(state))
    }

    pub fn entries(&self) -> impl Iterator<Item = (StateClass, &Color)> {
        StateClass::ALL.into_iter().map(|c| (c, self.get(c)))
    }
}

pub fn color_of(state: ExpressionState, palette: &Palette) -> &Color {
    palette.color_of(state)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderNode {
    pub id: StructureId,
    pub fill: String,
    pub state: StateClass,
    pub name: String,
    pub hover: String,
}

/// A diagram ready for serialization. `nodes` is aligned with `geometry`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderModel {
    pub title: String,
    pub gene: GeneSymbol,
    pub stage: StageNumber,
    pub mode: ViewMode,
    pub geometry: Geometry,
    pub nodes: Vec<RenderNode>,
    pub labels: LabelPlan,
}

impl RenderModel {
    pub fn kind(&self) -> DiagramKind {
        self.geometry.kind()
    }

    /// Ids of nodes drawn in a positive (non-grey) color.
    pub fn positive_ids(&self) -> impl Iterator<Item = StructureId> + '_ {
        self.nodes.iter().filter(|n| n.state.is_positive()).map(|n| n.id)
    }
}

pub fn diagram_title(gene: &GeneSymbol, stage: StageNumber) -> String {
    format!("{gene} @ TS{stage}")
}

/// Composes one diagram over the staged or abstract anatomy.
pub fn compose_diagram(
    anatomy: &Anatomy,
    store: &AnnotationStore,
    gene: &GeneSymbol,
    stage: StageNumber,
    mode: ViewMode,
    kind: DiagramKind,
    palette: &Palette,
) -> Result<RenderModel, ComposeError> {
    let view = view_for(anatomy, stage, mode);
    let geometry = layout(&view, &LayoutParams::new(kind))?;
    Ok(compose_with_geometry(anatomy, store, &view, geometry, gene, stage, mode, palette))
}

/// Composes over a precomputed view and geometry, such as a re-rooted zoom.
#[allow(clippy::too_many_arguments)]
pub fn compose_with_geometry(
    anatomy: &Anatomy,
    store: &AnnotationStore,
    view: &StagedTree,
    geometry: Geometry,
    gene: &GeneSymbol,
    stage: StageNumber,
    mode: ViewMode,
    palette: &Palette,
) -> RenderModel {
    let states = propagate_in_view(store, anatomy, view, gene, stage, mode);
    compose_with_states(anatomy, store, view, geometry, &states, palette)
}

/// Composes from expression states computed (or cached) elsewhere. `states`
/// must cover the nodes of `view`; missing entries are drawn as no data.
pub fn compose_with_states(
    anatomy: &Anatomy,
    store: &AnnotationStore,
    view: &StagedTree,
    geometry: Geometry,
    states: &StateMap,
    palette: &Palette,
) -> RenderModel {
    let (gene, stage, mode) = (&states.gene, states.stage, states.mode);
    let structures = anatomy.structures();
    let nodes = view
        .nodes()
        .iter()
        .map(|n| {
            let structure = &structures[n.anatomy_index];
            let state = states.get(n.id).unwrap_or(ExpressionState::NoInfo);
            let class = StateClass::of(state);
            let mut hover = format!("{} \u{2014} {}", structure.name, class.describe());
            if let ExpressionState::Direct(_) = state {
                if let Some(r) = store.annotation(gene, n.id, stage).and_then(|a| a.source_ref.as_deref()) {
                    hover.push('\n');
                    hover.push_str(r);
                }
            }
            RenderNode {
                id: n.id,
                fill: palette.get(class).hex.clone(),
                state: class,
                name: structure.name.clone(),
                hover,
            }
        })
        .collect();
    let labels = plan_labels(view, &geometry, anatomy);
    RenderModel { title: diagram_title(gene, stage), gene: gene.clone(), stage, mode, geometry, nodes, labels }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub cells: Vec<(GeneSymbol, StageNumber)>,
    pub columns: usize,
    pub mode: ViewMode,
    pub kind: DiagramKind,
}

impl GridSpec {
    /// Every gene at every stage, gene-major.
    pub fn product(genes: &[GeneSymbol], stages: &[StageNumber], columns: usize, mode: ViewMode, kind: DiagramKind) -> GridSpec {
        let cells = genes.iter().flat_map(|g| stages.iter().map(move |s| (g.clone(), *s))).collect();
        GridSpec { cells, columns, mode, kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPlacement {
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub columns: usize,
    pub rows: usize,
    pub placements: Vec<GridPlacement>,
    pub models: Vec<RenderModel>,
}

/// One model per cell, placed row-major. Cells that share a view share one
/// geometry, so abstract-mode cells differ only in their fills.
pub fn compose_grid(
    anatomy: &Anatomy,
    store: &AnnotationStore,
    spec: &GridSpec,
    palette: &Palette,
) -> Result<Grid, ComposeError> {
    compose_grid_with(anatomy, store, spec, palette, |view, gene, stage| {
        propagate_in_view(store, anatomy, view, gene, stage, spec.mode)
    })
}

/// [`compose_grid`] with expression states supplied by the caller, e.g.
/// from a cache. `states_for` gets the full view each cell is drawn over.
pub fn compose_grid_with<S: Borrow<StateMap>>(
    anatomy: &Anatomy,
    store: &AnnotationStore,
    spec: &GridSpec,
    palette: &Palette,
    mut states_for: impl FnMut(&StagedTree, &GeneSymbol, StageNumber) -> S,
) -> Result<Grid, ComposeError> {
    if spec.cells.is_empty() {
        return Err(ComposeError::EmptyGrid);
    }
    if spec.columns == 0 {
        return Err(ComposeError::NoColumns);
    }
    let params = LayoutParams::new(spec.kind);
    let mut views: BTreeMap<Option<StageNumber>, (StagedTree, Geometry)> = BTreeMap::new();
    let mut models = Vec::with_capacity(spec.cells.len());
    for (gene, stage) in &spec.cells {
        let key = match spec.mode {
            ViewMode::Staged => Some(*stage),
            ViewMode::Abstract => None,
        };
        if let Entry::Vacant(slot) = views.entry(key) {
            let view = view_for(anatomy, *stage, spec.mode);
            let geometry = layout(&view, &params)?;
            slot.insert((view, geometry));
        }
        let (view, geometry) = &views[&key];
        let states = states_for(view, gene, *stage);
        models.push(compose_with_states(anatomy, store, view, geometry.clone(), states.borrow(), palette));
    }
    let placements = (0..models.len())
        .map(|i| GridPlacement { row: i / spec.columns, col: i % spec.columns })
        .collect();
    let rows = models.len().div_ceil(spec.columns);
    Ok(Grid { columns: spec.columns, rows, placements, models })
}
