//! Specifications and mutation patches shipped with the crate.

use crate::parser::{parse_spec, SpecError};
use crate::term::Specification;

pub const NAT_BOOL: &str = include_str!("../specs/nat_bool.spec");
pub const CONTAINERS: &str = include_str!("../specs/containers.spec");

/// Bundled specifications, by declared name.
pub const BUILTIN: &[(&str, &str)] = &[("NatBool", NAT_BOOL), ("Containers", CONTAINERS)];

pub const MUTATIONS: &[(&str, &str)] = &[
    ("M0", include_str!("../specs/mutations/M0.spec")),
    ("M1", include_str!("../specs/mutations/M1.spec")),
    ("M2", include_str!("../specs/mutations/M2.spec")),
    ("M3", include_str!("../specs/mutations/M3.spec")),
    ("M4", include_str!("../specs/mutations/M4.spec")),
    ("M5", include_str!("../specs/mutations/M5.spec")),
];

pub fn builtin_source(name: &str) -> Option<&'static str> {
    BUILTIN
        .iter()
        .chain(MUTATIONS)
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
}

pub fn mutation_source(id: &str) -> Option<&'static str> {
    MUTATIONS.iter().find(|(m, _)| *m == id).map(|(_, t)| *t)
}

pub fn load(name: &str) -> Result<Specification, SpecError> {
    let text = builtin_source(name).ok_or_else(|| SpecError::Io {
        path: format!("<builtin>/{name}.spec").into(),
        message: "no such bundled specification".into(),
    })?;
    parse_spec(text, &[])
}

/// The bundled containers specification.
pub fn containers() -> Specification {
    load("Containers").expect("bundled containers.spec parses")
}

pub fn nat_bool() -> Specification {
    load("NatBool").expect("bundled nat_bool.spec parses")
}
