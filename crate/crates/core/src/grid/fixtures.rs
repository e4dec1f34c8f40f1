//! Bundled desk-scale cases.

pub const THREE_BUS: &str = include_str!("../../fixtures/three_bus.case");
pub const SIX_BUS: &str = include_str!("../../fixtures/six_bus.case");
pub const TWENTYFOUR_BUS: &str = include_str!("../../fixtures/twentyfour_bus.case");

pub const ALL: [(&str, &str); 3] = [
    ("three_bus", THREE_BUS),
    ("six_bus", SIX_BUS),
    ("twentyfour_bus", TWENTYFOUR_BUS),
];

/// Looks up a bundled case by name (`three_bus`, `six_bus`, `twentyfour_bus`).
pub fn by_name(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
