//! The example fans shipped with the library.

use crate::fan::Fan;

const SOURCES: &[(&str, &str)] = &[
    ("p1", include_str!("../fans/p1.json")),
    ("p2", include_str!("../fans/p2.json")),
    ("p3", include_str!("../fans/p3.json")),
    ("p1xp1", include_str!("../fans/p1xp1.json")),
    ("p1_cubed", include_str!("../fans/p1_cubed.json")),
    ("p112", include_str!("../fans/p112.json")),
    ("nonprojective", include_str!("../fans/nonprojective.json")),
    ("octahedron_normal", include_str!("../fans/octahedron_normal.json")),
];

/// Incomplete fan used as a negative control.
pub const QUADRANT: &str = include_str!("../fans/quadrant.json");

/// Names of the bundled complete fans.
pub fn names() -> Vec<&'static str> {
    SOURCES.iter().map(|(n, _)| *n).collect()
}

pub fn source(name: &str) -> Option<&'static str> {
    if name == "quadrant" {
        return Some(QUADRANT);
    }
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parses a bundled fan. Panics on unknown names.
pub fn fan(name: &str) -> Fan {
    let text = source(name).unwrap_or_else(|| panic!("no bundled fan named {name}"));
    Fan::from_json(text).expect("bundled fans are valid")
}

/// All bundled complete fans with their names.
pub fn all() -> Vec<(&'static str, Fan)> {
    SOURCES.iter().map(|(n, _)| (*n, fan(n))).collect()
}
