//! Seeded synthetic data: an anatomy shaped like the mouse developmental
//! anatomy and an annotation file over it.
//!
//! Five structures (root included) exist at TS1; every other structure
//! starts at TS2 or later. The heart is always `EMAPA:16105`, staged as
//! `EMAP:315` at TS12 and `EMAP:2411` at TS17.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io;
use std::path::Path;

use atlasburst_core::{
    Anatomy, Annotation, GeneSymbol, Level, StageNumber, StageSet, Structure, StructureId, STAGE_COUNT,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::format::{write_anatomy, write_annotations};

pub const ANATOMY_FILE: &str = "anatomy.json";
pub const ANNOTATIONS_FILE: &str = "annotations.ndjson";

pub const HEART: StructureId = StructureId::abstract_id(16105);
pub const ROOT: StructureId = StructureId::abstract_id(25765);

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub structures: usize,
    pub genes: usize,
    pub stages: u8,
    /// Mean annotations per gene.
    pub density: f64,
    pub seed: u64,
}

impl FixtureSpec {
    pub fn new(structures: usize, genes: usize, seed: u64) -> Self {
        FixtureSpec { structures, genes, stages: STAGE_COUNT, density: 4.0, seed }
    }
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("need at least 5 structures, got {0}")]
    TooFewStructures(usize),
    #[error("need at least one gene")]
    NoGenes,
    #[error("stage count must be 1..=26, got {0}")]
    Stages(u8),
    #[error("more than 5 structures need at least 2 stages")]
    NoRoomAfterTs1,
    #[error("density must be positive and finite")]
    Density,
    #[error("writing fixtures: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone)]
pub struct Fixtures {
    pub anatomy: Anatomy,
    pub annotations: Vec<Annotation>,
}

impl Fixtures {
    pub fn anatomy_json(&self) -> String {
        write_anatomy(&self.anatomy)
    }

    pub fn annotations_ndjson(&self) -> String {
        write_annotations(&self.annotations)
    }
}

fn stage(n: u8) -> StageNumber {
    StageNumber::new(i64::from(n)).expect("stage in range")
}

fn span(from: u8, to: u8) -> StageSet {
    StageSet::range(stage(from), stage(to))
}

const REGIONS: &[&str] = &[
    "anterior", "posterior", "dorsal", "ventral", "medial", "lateral", "proximal", "distal", "rostral", "caudal",
];
const TISSUES: &[&str] = &[
    "mesenchyme", "epithelium", "cartilage", "muscle", "vasculature", "nerve", "ganglion", "duct", "bud", "primordium",
    "condensation", "lumen",
];
const FAMILIES: &[&str] = &[
    "Bmp", "Fgf", "Wnt", "Hoxa", "Hoxd", "Sox", "Pax", "Tbx", "Gata", "Foxa", "Msx", "Dlx", "Lhx", "Nkx", "Six", "Eya",
];

struct Node {
    structure: Structure,
    start: u8,
    end: u8,
}

type Named = (&'static str, &'static str, u8, Option<u64>, Option<Option<&'static str>>);

/// Named structures added after the TS1 set, in order, while the requested
/// count allows: (name, parent, first stage, id, major-system abbreviation).
const NAMED: &[Named] = &[
    ("cardiovascular system", "embryo", 7, None, Some(Some("CVS"))),
    ("heart", "cardiovascular system", 10, Some(16105), None),
    ("nervous system", "embryo", 11, None, Some(Some("NS"))),
    ("eye", "nervous system", 12, None, None),
    ("limb", "embryo", 10, None, Some(None)),
];

/// Builds the anatomy and annotations for `spec`.
pub fn generate(spec: &FixtureSpec) -> Result<Fixtures, FixtureError> {
    if spec.structures < 5 {
        return Err(FixtureError::TooFewStructures(spec.structures));
    }
    if spec.genes == 0 {
        return Err(FixtureError::NoGenes);
    }
    if spec.stages == 0 || spec.stages > STAGE_COUNT {
        return Err(FixtureError::Stages(spec.stages));
    }
    if spec.structures > 5 && spec.stages < 2 {
        return Err(FixtureError::NoRoomAfterTs1);
    }
    if !(spec.density.is_finite() && spec.density > 0.0) {
        return Err(FixtureError::Density);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let last = spec.stages;
    let anatomy = build_anatomy(spec, last, &mut rng);
    let annotations = build_annotations(spec, last, &anatomy, &mut rng);
    Ok(Fixtures { anatomy, annotations })
}

fn build_anatomy(spec: &FixtureSpec, last: u8, rng: &mut ChaCha8Rng) -> Anatomy {
    let mut nodes: Vec<Node> = Vec::with_capacity(spec.structures);
    let mut next_id = 20000u64;
    let mut fresh_id = || {
        next_id += 1;
        StructureId::abstract_id(next_id)
    };
    let add = |nodes: &mut Vec<Node>, id: StructureId, name: &str, parent: Option<usize>, start: u8, end: u8| {
        let parent_id = parent.map(|p: usize| nodes[p].structure.id);
        nodes.push(Node { structure: Structure::new(id, name, parent_id, span(start, end)), start, end });
        nodes.len() - 1
    };
    add(&mut nodes, ROOT, "mouse", None, 1, last);
    let embryo = add(&mut nodes, fresh_id(), "embryo", Some(0), 1, last);
    add(&mut nodes, fresh_id(), "extraembryonic component", Some(0), 1, last);
    add(&mut nodes, fresh_id(), "zona pellucida", Some(0), 1, last.min(4));
    add(&mut nodes, fresh_id(), "polar body", Some(0), 1, last.min(3));

    for &(name, parent, first, id, major) in NAMED {
        if nodes.len() == spec.structures {
            break;
        }
        let parent = nodes.iter().position(|n| n.structure.name == parent).unwrap_or(embryo);
        let start = first.min(last).max(2).max(nodes[parent].start);
        let id = id.map_or_else(&mut fresh_id, StructureId::abstract_id);
        let i = add(&mut nodes, id, name, Some(parent), start, last);
        let s = &mut nodes[i].structure;
        if let Some(abbr) = major {
            *s = s.clone().major_system(abbr);
        }
        if id == HEART {
            for (at, staged) in [(12, 315), (17, 2411)] {
                if at <= last {
                    s.aliases.insert(stage(at), StructureId::staged(staged));
                }
            }
        }
    }

    let mut next_alias = 100_000u64;
    while nodes.len() < spec.structures {
        // Parents that still exist after TS1, so the TS1 view stays fixed.
        let parent = loop {
            let p = rng.random_range(0..nodes.len());
            if nodes[p].end >= 2 {
                break p;
            }
        };
        let (ps, pe) = (nodes[parent].start.max(2), nodes[parent].end);
        let start = (ps + rng.random_range(0..3u8)).min(pe);
        let end = if rng.random_bool(0.8) { pe } else { rng.random_range(start..=pe) };
        let k = nodes.len();
        let name = format!(
            "{} {} {}",
            REGIONS[rng.random_range(0..REGIONS.len())],
            TISSUES[rng.random_range(0..TISSUES.len())],
            k
        );
        let id = fresh_id();
        let i = add(&mut nodes, id, &name, Some(parent), start, end);
        if k.is_multiple_of(10) {
            next_alias += 1;
            nodes[i].structure.aliases.insert(stage(start), StructureId::staged(next_alias));
        }
    }

    let structures = nodes.into_iter().map(|n| n.structure).collect();
    let (anatomy, _) = Anatomy::from_structures(ROOT, structures).expect("generated anatomy is valid");
    anatomy
}

fn gene_symbol(i: usize) -> GeneSymbol {
    let family = FAMILIES[i % FAMILIES.len()];
    GeneSymbol::new(&format!("{family}{}", i / FAMILIES.len() + 1)).expect("valid symbol")
}

fn random_level(rng: &mut ChaCha8Rng) -> Level {
    match rng.random_range(0..10u8) {
        0 | 1 => Level::Strong,
        2 | 3 => Level::Moderate,
        4 | 5 => Level::Weak,
        6 | 7 => Level::Present,
        _ => Level::NotDetected,
    }
}

fn build_annotations(spec: &FixtureSpec, last: u8, anatomy: &Anatomy, rng: &mut ChaCha8Rng) -> Vec<Annotation> {
    let views: HashMap<u8, Vec<StructureId>> =
        (1..=last).map(|s| (s, anatomy.staged_view(stage(s)).ids().collect())).collect();
    let anchor = last.min(23);
    let whole = spec.density.floor() as usize;
    let frac = spec.density - spec.density.floor();
    let mut out = Vec::with_capacity((spec.genes as f64 * spec.density) as usize + spec.genes);
    let mut seen = HashSet::new();
    for g in 0..spec.genes {
        let gene = gene_symbol(g);
        let count = (whole + usize::from(rng.random_bool(frac))).max(1);
        for k in 0..count {
            // Duplicate keys would be reported as conflicts; retry a few times.
            for _ in 0..8 {
                let s = if k == 0 { anchor } else { rng.random_range(1..=last) };
                let ids = &views[&s];
                let structure = ids[rng.random_range(0..ids.len())];
                if seen.insert((g, structure, s)) {
                    out.push(Annotation {
                        gene: gene.clone(),
                        structure,
                        stage: stage(s),
                        level: random_level(rng),
                        source_ref: Some(format!("FIX:{}", out.len() + 1)),
                    });
                    break;
                }
            }
        }
    }
    out
}

/// Writes `anatomy.json` and `annotations.ndjson` into `dir`.
pub fn write_fixtures(spec: &FixtureSpec, dir: &Path) -> Result<Fixtures, FixtureError> {
    let fixtures = generate(spec)?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join(ANATOMY_FILE), fixtures.anatomy_json())?;
    fs::write(dir.join(ANNOTATIONS_FILE), fixtures.annotations_ndjson())?;
    Ok(fixtures)
}
