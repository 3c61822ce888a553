#![allow(dead_code)]

use std::fs;
use std::path::Path;

use atlasburst::format::{parse_anatomy, ParseMode};
use atlasburst::service::{load_snapshot, ServiceConfig, Snapshot};
use atlasburst_core::{Anatomy, GeneSymbol, StageNumber, StructureId};
use tempfile::TempDir;

/// Fifteen structures. TS1 has mouse, embryo, extraembryonic component,
/// zona pellucida and polar body. Limb and nervous system are the major
/// systems.
pub const ANATOMY: &str = r#"{"format":"atlasburst-anatomy/1","root":"EMAPA:25765","structures":[
{"id":"EMAPA:25765","name":"mouse","stages":["1-26"]},
{"id":"EMAPA:16039","name":"embryo","parent":"EMAPA:25765","stages":["1-26"]},
{"id":"EMAPA:16042","name":"extraembryonic component","parent":"EMAPA:25765","stages":["1-26"]},
{"id":"EMAPA:16044","name":"zona pellucida","parent":"EMAPA:25765","stages":["1-4"]},
{"id":"EMAPA:16043","name":"polar body","parent":"EMAPA:25765","stages":["1-3"]},
{"id":"EMAPA:16405","name":"limb","parent":"EMAPA:16039","stages":["10-26"],"major_system":true},
{"id":"EMAPA:17000","name":"paw","parent":"EMAPA:16405","stages":["14-26"]},
{"id":"EMAPA:17001","name":"digit","parent":"EMAPA:17000","stages":["16-26"]},
{"id":"EMAPA:17002","name":"paw pad","parent":"EMAPA:17000","stages":["16-26"]},
{"id":"EMAPA:16105","name":"heart","parent":"EMAPA:16039","stages":["10-26"],"aliases":{"12":"EMAP:315","17":"EMAP:2411"}},
{"id":"EMAPA:16469","name":"nervous system","abbr":"NS","parent":"EMAPA:16039","stages":["11-26"],"major_system":true},
{"id":"EMAPA:16198","name":"eye","parent":"EMAPA:16469","stages":["12-26"]},
{"id":"EMAPA:16199","name":"lens","parent":"EMAPA:16198","stages":["12-26"]},
{"id":"EMAPA:16200","name":"retina","parent":"EMAPA:16198","stages":["12-26"]},
{"id":"EMAPA:16846","name":"liver","parent":"EMAPA:16039","stages":["12-26"]}
]}
"#;

pub const ROOT: u64 = 25765;
pub const EMBRYO: u64 = 16039;
pub const LIMB: u64 = 16405;
pub const PAW: u64 = 17000;
pub const DIGIT: u64 = 17001;
pub const PAW_PAD: u64 = 17002;
pub const HEART: u64 = 16105;
pub const NERVOUS: u64 = 16469;
pub const EYE: u64 = 16198;
pub const LENS: u64 = 16199;
pub const RETINA: u64 = 16200;
pub const LIVER: u64 = 16846;

/// TS12: Pax6, Six3 and Sox2 are the only genes annotated in the eye
/// subtree; four more genes are annotated elsewhere.
/// TS17: the containment family gA..gD.
pub const ANNOTATIONS: &str = r#"# eye family, TS12
{"gene":"Pax6","structure":"EMAPA:16199","stage":12,"level":"strong","ref":"EMAGE:101"}
{"gene":"Pax6","structure":"EMAPA:16105","stage":12,"level":"weak"}
{"gene":"Six3","structure":"EMAPA:16200","stage":12,"level":"moderate"}
{"gene":"Sox2","structure":"EMAPA:16198","stage":12,"level":"present"}
{"gene":"Bmp4","structure":"EMAPA:16105","stage":12,"level":"strong","ref":"EMAGE:102"}
{"gene":"Shh","structure":"EMAPA:16846","stage":12,"level":"weak"}
{"gene":"Fgf8","structure":"EMAPA:16405","stage":12,"level":"present"}
{"gene":"Wnt1","structure":"EMAPA:16846","stage":12,"level":"not_detected"}
# containment family, TS17
{"gene":"gA","structure":"EMAPA:17001","stage":17,"level":"strong"}
{"gene":"gA","structure":"EMAPA:16105","stage":17,"level":"not_detected"}
{"gene":"gB","structure":"EMAPA:17001","stage":17,"level":"moderate"}
{"gene":"gB","structure":"EMAPA:17002","stage":17,"level":"weak"}
{"gene":"gC","structure":"EMAPA:16105","stage":17,"level":"weak"}
{"gene":"gD","structure":"EMAPA:17001","stage":17,"level":"present"}
{"gene":"gD","structure":"EMAPA:17002","stage":17,"level":"strong"}
{"gene":"gD","structure":"EMAPA:16105","stage":17,"level":"present"}
{"gene":"gD","structure":"EMAPA:16199","stage":17,"level":"moderate"}
{"gene":"Bmp4","structure":"EMAPA:17000","stage":15,"level":"strong","ref":"EMAGE:103"}
"#;

pub const EYE_GENES: [&str; 3] = ["Pax6", "Six3", "Sox2"];
pub const FAMILY: [&str; 4] = ["gA", "gB", "gC", "gD"];
/// `CONTAINMENT[i][j]`: profile of FAMILY[i] is a subset of FAMILY[j] at TS17.
pub const CONTAINMENT: [[bool; 4]; 4] = [
    [true, true, false, true],
    [false, true, false, true],
    [false, false, true, true],
    [false, false, false, true],
];

pub fn id(n: u64) -> StructureId {
    StructureId::abstract_id(n)
}

pub fn stage(n: u8) -> StageNumber {
    StageNumber::new(i64::from(n)).unwrap()
}

pub fn gene(s: &str) -> GeneSymbol {
    GeneSymbol::new(s).unwrap()
}

pub fn anatomy() -> Anatomy {
    parse_anatomy(ANATOMY.as_bytes(), ParseMode::Strict).unwrap().anatomy
}

pub fn data_dir(anatomy: &str, annotations: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_data(dir.path(), anatomy, annotations);
    dir
}

pub fn write_data(dir: &Path, anatomy: &str, annotations: &str) {
    fs::write(dir.join("anatomy.json"), anatomy).unwrap();
    fs::write(dir.join("annotations.ndjson"), annotations).unwrap();
}

pub fn load(dir: &Path) -> Snapshot {
    load_snapshot(&ServiceConfig::new(dir), 1).unwrap()
}

pub fn snapshot() -> (TempDir, Snapshot) {
    let dir = data_dir(ANATOMY, ANNOTATIONS);
    let s = load(dir.path());
    (dir, s)
}
