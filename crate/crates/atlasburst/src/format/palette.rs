//! Palette config: a JSON object mapping state class to hex color, e.g.
//! `{"strong":"#ff0000","propagated":"#ffc0cb"}`. Unlisted classes keep
//! their default color.

use std::collections::BTreeMap;
use std::io::Read;

use atlasburst_core::Palette;

use super::FormatError;

pub fn parse_palette(source: impl Read) -> Result<Palette, FormatError> {
    let map: BTreeMap<String, String> = serde_json::from_reader(source).map_err(|e| FormatError::syntax(e, 0))?;
    Palette::with_overrides(map.iter().map(|(k, v)| (k.as_str(), v.as_str()))).map_err(|e| FormatError::Palette(e.to_string()))
}
