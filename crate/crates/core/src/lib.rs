//! Volumes of simple hyperbolic polyhedra from generalised-tetrahedron decompositions, and
//! quantum 6j spin-network invariants of their 1-skeleta.

pub mod catalog;
pub mod glue;
pub mod graph;
pub mod kr;
pub mod numerics;
pub mod tetra;
