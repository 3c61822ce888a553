#![allow(dead_code)]

use std::collections::BTreeMap;

use atlasburst_core::{
    Anatomy, Annotation, AnnotationStore, GeneSymbol, Level, StageNumber, StageSet, Structure, StructureId,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stage(n: u8) -> StageNumber {
    StageNumber::new(i64::from(n)).unwrap()
}

/// A random anatomy of exactly `n` structures. Each child's stage interval
/// lies inside its parent's, names are shuffled so sibling order differs
/// from insertion order.
pub fn random_anatomy(rng: &mut ChaCha8Rng, n: usize) -> Anatomy {
    let mut ids: Vec<u64> = (0..n as u64).map(|i| 1000 + i * 7).collect();
    ids.shuffle(rng);
    let mut names: Vec<usize> = (0..n).collect();
    names.shuffle(rng);
    let mut spans: Vec<(u8, u8)> = vec![(1, 26)];
    let mut structures = vec![Structure::new(StructureId::abstract_id(ids[0]), "mouse", None, StageSet::all())];
    for i in 1..n {
        let p = rng.random_range(0..i);
        let (ps, pe) = spans[p];
        let start = rng.random_range(ps..=pe);
        let end = if rng.random_bool(0.7) { pe } else { rng.random_range(start..=pe) };
        spans.push((start, end));
        structures.push(Structure::new(
            StructureId::abstract_id(ids[i]),
            format!("part {}", names[i]),
            Some(StructureId::abstract_id(ids[p])),
            StageSet::range(stage(start), stage(end)),
        ));
    }
    Anatomy::from_structures(StructureId::abstract_id(ids[0]), structures).unwrap().0
}

pub const LEVELS: [Level; 5] = Level::ALL;

/// Random annotations for `genes` genes on structures that exist at the stage.
pub fn random_annotations(rng: &mut ChaCha8Rng, anatomy: &Anatomy, genes: usize, count: usize) -> Vec<Annotation> {
    let structures = anatomy.structures();
    (0..count)
        .map(|_| loop {
            let s = &structures[rng.random_range(0..structures.len())];
            let st = stage(rng.random_range(1..=26));
            if !s.stages.contains(st) {
                continue;
            }
            break Annotation {
                gene: GeneSymbol::new(&format!("G{}", rng.random_range(0..genes))).unwrap(),
                structure: s.id,
                stage: st,
                level: LEVELS[rng.random_range(0..LEVELS.len())],
                source_ref: None,
            };
        })
        .collect()
}

pub fn build_store(anatomy: &Anatomy, records: Vec<Annotation>) -> AnnotationStore {
    AnnotationStore::build(anatomy, records).unwrap().0
}

/// Parent links taken straight from the structure records.
pub fn parent_map(anatomy: &Anatomy) -> BTreeMap<StructureId, Option<StructureId>> {
    anatomy.structures().iter().map(|s| (s.id, s.parent)).collect()
}

/// Walks parent pointers: is `anc` a strict ancestor of `node`?
pub fn is_strict_ancestor(parents: &BTreeMap<StructureId, Option<StructureId>>, anc: StructureId, node: StructureId) -> bool {
    let mut cur = parents[&node];
    while let Some(p) = cur {
        if p == anc {
            return true;
        }
        cur = parents[&p];
    }
    false
}
