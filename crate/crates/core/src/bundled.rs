//! Structure-spec files shipped with the crate.

/// Two elements, one order-dependent unary relation `R1`.
pub const EXAMPLE: &str = include_str!("../specs/example.npm");
/// A unary function `f`, a constant `c` and a relation `P`.
pub const SUCCESSOR: &str = include_str!("../specs/successor.npm");
/// A binary relation `E` on two elements.
pub const EDGES: &str = include_str!("../specs/edges.npm");
/// Two unary relations over three elements.
pub const TWO_RELATIONS: &str = include_str!("../specs/two_relations.npm");

pub const ALL: [(&str, &str); 4] = [
    ("example", EXAMPLE),
    ("successor", SUCCESSOR),
    ("edges", EDGES),
    ("two_relations", TWO_RELATIONS),
];
