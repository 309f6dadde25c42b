//! Built-in polyhedra.

use serde::{Deserialize, Serialize};

use crate::graph::{
    FaceCycle, FaceId, GraphError, PiRational, PlanarTrivalentGraph, PolyhedronFile,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub polyhedron: PolyhedronFile,
    #[serde(default)]
    pub expected_volume: Option<f64>,
    #[serde(default)]
    pub notes: String,
}

pub const NAMES: [&str; 5] = [
    "prism-235",
    "dodecahedron-right-angled",
    "dodecahedron-pi3",
    "tetrahedron-regular(p/q)",
    "pleated-prism-template",
];

/// Side faces 1..5 in cyclic order, face 6 the bottom pentagon, face 7 the top one.
/// Edge 0 is the vertical edge between faces 1 and 2.
pub fn pentagonal_prism() -> PlanarTrivalentGraph {
    let side = |i: FaceId| (i, vec![i % 5 + 1, 6, (i + 3) % 5 + 1, 7]);
    let mut rot: Vec<(FaceId, Vec<FaceId>)> = (1..=5).map(side).collect();
    rot.push((6, vec![1, 2, 3, 4, 5]));
    rot.push((7, vec![5, 4, 3, 2, 1]));
    PlanarTrivalentGraph::from_face_rotation(&rot).expect("prism combinatorics")
}

/// Pentagonal prism whose fourth side face is split into faces 4 (along face 6) and 8
/// (along face 7).
pub fn pleated_prism() -> PlanarTrivalentGraph {
    let rot: Vec<(FaceId, Vec<FaceId>)> = vec![
        (1, vec![2, 6, 5, 7]),
        (2, vec![3, 6, 1, 7]),
        (3, vec![4, 6, 2, 7, 8]),
        (4, vec![5, 6, 3, 8]),
        (5, vec![1, 6, 4, 8, 7]),
        (6, vec![1, 2, 3, 4, 5]),
        (7, vec![5, 8, 3, 2, 1]),
        (8, vec![5, 4, 3, 7]),
    ];
    PlanarTrivalentGraph::from_face_rotation(&rot).expect("pleated prism combinatorics")
}

const DODECAHEDRON: [[usize; 5]; 12] = [
    [17, 11, 5, 19, 7],
    [3, 16, 1, 11, 17],
    [5, 11, 1, 9, 15],
    [18, 12, 3, 17, 7],
    [16, 10, 0, 9, 1],
    [5, 15, 4, 13, 19],
    [19, 13, 6, 18, 7],
    [3, 12, 2, 10, 16],
    [15, 9, 0, 8, 4],
    [6, 14, 2, 12, 18],
    [6, 13, 4, 8, 14],
    [14, 8, 0, 10, 2],
];

/// Regular dodecahedron, faces 1..12 from the top face down.
pub fn dodecahedron() -> PlanarTrivalentGraph {
    let cycles: Vec<FaceCycle> = DODECAHEDRON
        .iter()
        .enumerate()
        .map(|(i, vs)| FaceCycle {
            id: i as FaceId + 1,
            label: (i + 1).to_string(),
            vertices: vs.to_vec(),
        })
        .collect();
    PlanarTrivalentGraph::from_face_cycles(&cycles).expect("dodecahedron combinatorics")
}

pub fn tetrahedron_graph() -> PlanarTrivalentGraph {
    PlanarTrivalentGraph::from_face_rotation(&[
        (1, vec![2, 3, 4]),
        (2, vec![1, 4, 3]),
        (3, vec![1, 2, 4]),
        (4, vec![1, 3, 2]),
    ])
    .expect("tetrahedron combinatorics")
}

fn with_all_angles(mut g: PlanarTrivalentGraph, angle: PiRational) -> PlanarTrivalentGraph {
    let edges: Vec<usize> = g.edge_ids().collect();
    for e in edges {
        g.set_angle(e, angle).expect("valid angle");
    }
    g
}

pub fn prism_235() -> PlanarTrivalentGraph {
    let mut g = pentagonal_prism();
    let edges: Vec<usize> = g.edge_ids().collect();
    for e in edges {
        let (a, b) = g.edge_faces(e).expect("live edge");
        let angle = match (a, b) {
            (_, 6) => PiRational { p: 1, q: 2 },
            (_, 7) => PiRational { p: 1, q: 3 },
            _ => PiRational { p: 2, q: 5 },
        };
        g.set_angle(e, angle).expect("valid angle");
    }
    g
}

/// Parses `tetrahedron-regular(p/q)`.
fn parse_regular(name: &str) -> Option<Result<PiRational, GraphError>> {
    let inner = name
        .strip_prefix("tetrahedron-regular(")?
        .strip_suffix(')')?;
    let (p, q) = inner.split_once('/')?;
    let p = p.trim().parse().ok()?;
    let q = q.trim().parse().ok()?;
    Some(PiRational::new(p, q))
}

fn entry(name: &str, g: &PlanarTrivalentGraph, expected: Option<f64>, notes: &str) -> CatalogEntry {
    CatalogEntry {
        name: name.to_string(),
        polyhedron: g.to_file(Some(name)),
        expected_volume: expected,
        notes: notes.to_string(),
    }
}

/// The fixed entries; the regular tetrahedron is listed at angle π/3.
pub fn catalog() -> Vec<CatalogEntry> {
    NAMES
        .iter()
        .map(|n| match *n {
            "tetrahedron-regular(p/q)" => lookup("tetrahedron-regular(1/3)"),
            n => lookup(n),
        })
        .collect::<Result<_, _>>()
        .expect("built-in entries")
}

pub fn lookup(name: &str) -> Result<CatalogEntry, GraphError> {
    let unknown = || GraphError::Malformed(format!("unknown catalog entry `{name}`"));
    Ok(match name {
        "prism-235" => entry(
            name,
            &prism_235(),
            Some(2.63200),
            "pentagonal prism: bottom edges π/2, top edges π/3, vertical edges 2π/5",
        ),
        "dodecahedron-right-angled" => entry(
            name,
            &with_all_angles(dodecahedron(), PiRational { p: 1, q: 2 }),
            Some(4.30621),
            "all dihedral angles π/2",
        ),
        "dodecahedron-pi3" => entry(
            name,
            &with_all_angles(dodecahedron(), PiRational { p: 1, q: 3 }),
            Some(20.5802),
            "all dihedral angles π/3",
        ),
        "pleated-prism-template" => entry(
            name,
            &pleated_prism(),
            None,
            "combinatorics only; dihedral angles must be supplied",
        ),
        _ => {
            let angle = parse_regular(name).ok_or_else(unknown)??;
            let g = with_all_angles(tetrahedron_graph(), angle);
            entry(
                name,
                &g,
                None,
                "regular tetrahedron with all dihedral angles equal",
            )
        }
    })
}
