//! Textual annotations and the expression states derived from them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};
use core::ops::Range;
use core::str::FromStr;

use thiserror::Error;

use crate::anatomy::{Anatomy, StagedTree};
use crate::id::{StageNumber, StructureId, STAGE_COUNT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpressionError {
    #[error("invalid gene symbol {0:?}")]
    InvalidGene(String),
    #[error("unknown level token {0:?}")]
    UnknownLevel(String),
    #[error("record {record}: unknown structure {structure}")]
    UnknownStructure { record: usize, structure: StructureId },
    #[error("record {record}: structure {structure} does not exist at TS{stage}")]
    AbsentAtStage { record: usize, structure: StructureId, stage: StageNumber },
}

/// A gene symbol such as `Bmp4`. Spelling is kept for display; equality,
/// ordering and hashing ignore case.
#[derive(Debug, Clone)]
pub struct GeneSymbol {
    text: String,
    key: String,
}

impl GeneSymbol {
    pub const MAX_LEN: usize = 64;

    pub fn new(text: &str) -> Result<GeneSymbol, ExpressionError> {
        if text.is_empty() || text.chars().count() > Self::MAX_LEN || text.chars().any(char::is_whitespace) {
            return Err(ExpressionError::InvalidGene(text.into()));
        }
        Ok(GeneSymbol { text: text.into(), key: text.chars().flat_map(char::to_lowercase).collect() })
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Lower-cased comparison key.
    pub fn key(&self) -> &str {
        &self.key
    }
}

impl PartialEq for GeneSymbol {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for GeneSymbol {}

impl PartialOrd for GeneSymbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GeneSymbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}

impl Hash for GeneSymbol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state);
    }
}

impl fmt::Display for GeneSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl FromStr for GeneSymbol {
    type Err = ExpressionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GeneSymbol::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Strong,
    Moderate,
    Weak,
    Present,
    NotDetected,
}

impl Level {
    pub const ALL: [Level; 5] = [Level::Strong, Level::Moderate, Level::Weak, Level::Present, Level::NotDetected];

    pub fn is_positive(self) -> bool {
        self != Level::NotDetected
    }

    /// Conflict precedence; higher wins.
    pub fn precedence(self) -> u8 {
        match self {
            Level::Strong => 4,
            Level::Moderate => 3,
            Level::Weak => 2,
            Level::Present => 1,
            Level::NotDetected => 0,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Level::Strong => "strong",
            Level::Moderate => "moderate",
            Level::Weak => "weak",
            Level::Present => "present",
            Level::NotDetected => "not_detected",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Level::NotDetected => "not detected",
            other => other.token(),
        }
    }
}

impl FromStr for Level {
    type Err = ExpressionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Level::ALL
            .into_iter()
            .find(|l| l.token() == s)
            .ok_or_else(|| ExpressionError::UnknownLevel(s.into()))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub gene: GeneSymbol,
    pub structure: StructureId,
    pub stage: StageNumber,
    pub level: Level,
    /// Experiment accession, carried through to hover text.
    pub source_ref: Option<String>,
}

/// A record that lost against another for the same (gene, structure, stage).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub gene: GeneSymbol,
    pub structure: StructureId,
    pub stage: StageNumber,
    pub kept: Level,
    pub dropped: Level,
    /// Position of the dropped record in the input.
    pub record: usize,
}

/// Annotations indexed by (gene, stage), (structure, stage) and stage.
#[derive(Debug, Clone, Default)]
pub struct AnnotationStore {
    // Sorted by (stage, gene, structure); each (stage, gene) block is contiguous.
    annotations: Vec<Annotation>,
    by_stage: Vec<Range<usize>>,
    by_gene_stage: BTreeMap<(GeneSymbol, StageNumber), Range<usize>>,
    by_structure_stage: BTreeMap<(StructureId, StageNumber), Vec<usize>>,
    genes: BTreeSet<GeneSymbol>,
}

impl AnnotationStore {
    /// Checks every record against the anatomy and resolves duplicates by
    /// level precedence (strong > moderate > weak > present > not_detected;
    /// the earlier record wins a tie). Losing records come back as conflicts.
    pub fn build(anatomy: &Anatomy, records: Vec<Annotation>) -> Result<(AnnotationStore, Vec<Conflict>), ExpressionError> {
        let mut kept: BTreeMap<(StageNumber, GeneSymbol, StructureId), (usize, Annotation)> = BTreeMap::new();
        let mut conflicts = Vec::new();
        for (record, ann) in records.into_iter().enumerate() {
            let structure = anatomy
                .get(ann.structure)
                .ok_or(ExpressionError::UnknownStructure { record, structure: ann.structure })?;
            if !structure.stages.contains(ann.stage) {
                return Err(ExpressionError::AbsentAtStage { record, structure: ann.structure, stage: ann.stage });
            }
            let key = (ann.stage, ann.gene.clone(), ann.structure);
            match kept.get_mut(&key) {
                None => {
                    kept.insert(key, (record, ann));
                }
                Some((held_at, held)) => {
                    let (loser, loser_at) = if ann.level.precedence() > held.level.precedence() {
                        let old = core::mem::replace(held, ann);
                        let old_at = core::mem::replace(held_at, record);
                        (old, old_at)
                    } else {
                        (ann, record)
                    };
                    conflicts.push(Conflict {
                        gene: loser.gene,
                        structure: loser.structure,
                        stage: loser.stage,
                        kept: held.level,
                        dropped: loser.level,
                        record: loser_at,
                    });
                }
            }
        }
        conflicts.sort_by_key(|c| c.record);
        let store = AnnotationStore::from_sorted(kept.into_values().map(|(_, a)| a).collect());
        Ok((store, conflicts))
    }

    fn from_sorted(annotations: Vec<Annotation>) -> AnnotationStore {
        let mut by_stage = vec![0..0; STAGE_COUNT as usize + 1];
        let mut by_gene_stage: BTreeMap<(GeneSymbol, StageNumber), Range<usize>> = BTreeMap::new();
        let mut by_structure_stage: BTreeMap<(StructureId, StageNumber), Vec<usize>> = BTreeMap::new();
        let mut genes = BTreeSet::new();
        for (i, a) in annotations.iter().enumerate() {
            let stage_range = &mut by_stage[a.stage.get() as usize];
            if stage_range.start == stage_range.end {
                *stage_range = i..i + 1;
            } else {
                stage_range.end = i + 1;
            }
            by_gene_stage
                .entry((a.gene.clone(), a.stage))
                .and_modify(|r| r.end = i + 1)
                .or_insert(i..i + 1);
            by_structure_stage.entry((a.structure, a.stage)).or_default().push(i);
            if !genes.contains(&a.gene) {
                genes.insert(a.gene.clone());
            }
        }
        AnnotationStore { annotations, by_stage, by_gene_stage, by_structure_stage, genes }
    }

    pub fn len(&self) -> usize {
        self.annotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty()
    }

    /// All annotations, sorted by (stage, gene, structure).
    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    pub fn genes(&self) -> &BTreeSet<GeneSymbol> {
        &self.genes
    }

    pub fn at_stage(&self, stage: StageNumber) -> &[Annotation] {
        &self.annotations[self.by_stage[stage.get() as usize].clone()]
    }

    /// Annotations of one gene at one stage, sorted by structure.
    pub fn for_gene(&self, gene: &GeneSymbol, stage: StageNumber) -> &[Annotation] {
        match self.by_gene_stage.get(&(gene.clone(), stage)) {
            Some(r) => &self.annotations[r.clone()],
            None => &[],
        }
    }

    pub fn for_structure(&self, structure: StructureId, stage: StageNumber) -> impl Iterator<Item = &Annotation> {
        self.by_structure_stage
            .get(&(structure, stage))
            .into_iter()
            .flatten()
            .map(|&i| &self.annotations[i])
    }

    pub fn annotation(&self, gene: &GeneSymbol, structure: StructureId, stage: StageNumber) -> Option<&Annotation> {
        let block = self.for_gene(gene, stage);
        block.binary_search_by(|a| a.structure.cmp(&structure)).ok().map(|i| &block[i])
    }

    pub fn direct_level(&self, gene: &GeneSymbol, structure: StructureId, stage: StageNumber) -> Option<Level> {
        self.annotation(gene, structure, stage).map(|a| a.level)
    }

    pub fn annotation_count(&self, gene: &GeneSymbol, stage: StageNumber) -> usize {
        self.for_gene(gene, stage).len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViewMode {
    /// The anatomy of the queried stage only.
    Staged,
    /// The full abstract anatomy; structures absent at the stage are kept.
    Abstract,
}

impl ViewMode {
    pub fn token(self) -> &'static str {
        match self {
            ViewMode::Staged => "staged",
            ViewMode::Abstract => "abstract",
        }
    }
}

impl FromStr for ViewMode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "staged" => Ok(ViewMode::Staged),
            "abstract" => Ok(ViewMode::Abstract),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpressionState {
    Direct(Level),
    /// Not annotated itself, but some descendant has positive expression.
    Propagated,
    NoInfo,
    /// Abstract mode only: the structure does not exist at the stage.
    NotPresent,
}

impl ExpressionState {
    pub fn token(self) -> &'static str {
        match self {
            ExpressionState::Direct(l) => l.token(),
            ExpressionState::Propagated => "propagated",
            ExpressionState::NoInfo => "no_info",
            ExpressionState::NotPresent => "not_present",
        }
    }

    pub fn is_positive(self) -> bool {
        match self {
            ExpressionState::Direct(l) => l.is_positive(),
            ExpressionState::Propagated => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMap {
    pub gene: GeneSymbol,
    pub stage: StageNumber,
    pub mode: ViewMode,
    pub states: BTreeMap<StructureId, ExpressionState>,
}

impl StateMap {
    pub fn get(&self, id: StructureId) -> Option<ExpressionState> {
        self.states.get(&id).copied()
    }
}

/// The view a (stage, mode) pair is drawn over.
pub fn view_for(anatomy: &Anatomy, stage: StageNumber, mode: ViewMode) -> StagedTree {
    match mode {
        ViewMode::Staged => anatomy.staged_view(stage),
        ViewMode::Abstract => anatomy.abstract_view(),
    }
}

pub fn propagate_states(
    store: &AnnotationStore,
    anatomy: &Anatomy,
    gene: &GeneSymbol,
    stage: StageNumber,
    mode: ViewMode,
) -> StateMap {
    let view = view_for(anatomy, stage, mode);
    propagate_in_view(store, anatomy, &view, gene, stage, mode)
}

/// Expression states over an already-built view (which may be a re-rooted
/// subtree). Propagation only sees descendants inside `view`.
pub fn propagate_in_view(
    store: &AnnotationStore,
    anatomy: &Anatomy,
    view: &StagedTree,
    gene: &GeneSymbol,
    stage: StageNumber,
    mode: ViewMode,
) -> StateMap {
    let nodes = view.nodes();
    let mut direct: Vec<Option<Level>> = vec![None; nodes.len()];
    for a in store.for_gene(gene, stage) {
        if let Some(i) = view.position(a.structure) {
            direct[i] = Some(a.level);
        }
    }
    let mut positive_below = vec![false; nodes.len()];
    for i in (0..nodes.len()).rev() {
        if let Some(p) = nodes[i].parent {
            positive_below[p] |= positive_below[i] || direct[i].is_some_and(Level::is_positive);
        }
    }
    let structures = anatomy.structures();
    let states = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let state = if !structures[n.anatomy_index].stages.contains(stage) {
                ExpressionState::NotPresent
            } else if let Some(level) = direct[i] {
                ExpressionState::Direct(level)
            } else if positive_below[i] {
                ExpressionState::Propagated
            } else {
                ExpressionState::NoInfo
            };
            (n.id, state)
        })
        .collect();
    StateMap { gene: gene.clone(), stage, mode, states }
}

/// Structures positive for `gene` at `stage`, directly or by propagation,
/// in the staged anatomy. The set is closed under parent.
pub fn expression_profile(
    store: &AnnotationStore,
    anatomy: &Anatomy,
    gene: &GeneSymbol,
    stage: StageNumber,
) -> BTreeSet<StructureId> {
    propagate_states(store, anatomy, gene, stage, ViewMode::Staged)
        .states
        .into_iter()
        .filter(|(_, s)| s.is_positive())
        .map(|(id, _)| id)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsetResult {
    pub subset: bool,
    /// Some structure in the first profile but not the second.
    pub witness: Option<StructureId>,
}

pub fn profile_subset(
    store: &AnnotationStore,
    anatomy: &Anatomy,
    g1: &GeneSymbol,
    g2: &GeneSymbol,
    stage: StageNumber,
) -> SubsetResult {
    let p1 = expression_profile(store, anatomy, g1, stage);
    let p2 = expression_profile(store, anatomy, g2, stage);
    let witness = p1.difference(&p2).next().copied();
    SubsetResult { subset: witness.is_none(), witness }
}
