//! Std companion to `atlasburst-core`: anatomy and annotation file formats,
//! JSON documents, SVG output, fixture generation, the HTTP service and the
//! `atlasburst` command line.

#![forbid(unsafe_code)]

pub mod cli;
pub mod fixtures;
pub mod format;
pub mod service;
pub mod svg;

pub use atlasburst_core as core;
