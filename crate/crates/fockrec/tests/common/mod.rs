#![allow(dead_code)]

use std::path::PathBuf;

use fockrec::semantics::{CapSpec, Engine, SemanticsConfig, SkipConvention};
use fockrec::SourceModule;

pub fn walk_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../walks").join(name)
}

pub fn load(name: &str) -> SourceModule {
    let src = std::fs::read_to_string(walk_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    fockrec::parse(&src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn engine(name: &str, caps: CapSpec, skip: SkipConvention) -> Engine<f64> {
    Engine::new(&load(name), SemanticsConfig::default().with_caps(caps).with_skip(skip)).unwrap()
}

/// Caps with a bound on the total occupation.
pub fn total(n: usize) -> CapSpec {
    CapSpec::uniform(n).with_total(n)
}
