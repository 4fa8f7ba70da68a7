//! Qubit geometry and stabilizer structure for the two supported code families.
//!
//! Surface code: rotated XZZX patch on a `d x d` data-qubit grid. Data qubits
//! sit at odd integer coordinates `(2c+1, 2r+1)`, measure qubits at even
//! coordinates `(2a, 2b)`. The checkerboard class of a measure position gives
//! the stabilizer basis label; top/bottom boundaries host Z-type 2-qubit
//! stabilizers, left/right boundaries X-type, so the memory-Z observable is
//! the leftmost data column and the memory-X observable the bottom data row.
//!
//! Colour code: Bell-flagged triangular patch of a honeycomb lattice. Cells
//! are flat-top hexagons with centers at `(3j, cy)`, `cy = j (mod 2)`; the
//! triangle is cut by the lines `y >= 0`, `y <= x`, `y <= 6m - x` (after the
//! canonical +2 x-shift), which truncates boundary hexagons to weight-4
//! trapezoids. Each cell carries one measure and one flag ancilla shared by
//! its X and Z stabilizer readouts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodeKind {
    Surface,
    Colour,
}

impl std::fmt::Display for CodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CodeKind::Surface => write!(f, "surface"),
            CodeKind::Colour => write!(f, "colour"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn opposite(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Data,
    Measure,
    Flag,
}

/// Code instance selector: family, odd distance and memory basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeSpec {
    pub kind: CodeKind,
    pub distance: u32,
    pub basis: Basis,
}

impl CodeSpec {
    pub fn new(kind: CodeKind, distance: u32, basis: Basis) -> Result<Self, LayoutError> {
        if distance < 3 || distance % 2 == 0 {
            return Err(LayoutError::BadDistance(distance));
        }
        Ok(CodeSpec { kind, distance, basis })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LayoutError {
    #[error("distance must be an odd integer >= 3, got {0}")]
    BadDistance(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Qubit {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub role: Role,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stabilizer {
    pub id: u32,
    pub basis: Basis,
    /// Data-qubit members, sorted by id.
    pub members: Vec<u32>,
    pub measure: u32,
    pub flag: Option<u32>,
    /// Lattice position used for detector coordinates and position encodings.
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitLayout {
    pub spec: CodeSpec,
    pub qubits: Vec<Qubit>,
    pub stabilizers: Vec<Stabilizer>,
    /// Data-qubit ids supporting each logical observable (one per memory experiment).
    pub observable_support: Vec<Vec<u32>>,
}

impl QubitLayout {
    pub fn num_data(&self) -> usize {
        self.qubits.iter().filter(|q| q.role == Role::Data).count()
    }

    pub fn num_measure(&self) -> usize {
        self.qubits.iter().filter(|q| q.role == Role::Measure).count()
    }

    pub fn num_flag(&self) -> usize {
        self.qubits.iter().filter(|q| q.role == Role::Flag).count()
    }

    pub fn data_ids(&self) -> Vec<u32> {
        self.qubits.iter().filter(|q| q.role == Role::Data).map(|q| q.id).collect()
    }

    pub fn qubit(&self, id: u32) -> &Qubit {
        &self.qubits[id as usize]
    }

    /// Number of unified stabilizer slots per cycle as seen by the decoder:
    /// one per stabilizer for the surface code, one per (cell, basis) for the
    /// colour code (which is the same thing, both bases are listed).
    pub fn num_slots(&self) -> usize {
        self.stabilizers.len()
    }

    /// Text dump: one line per qubit `id role x y`, then one line per
    /// stabilizer `id basis measure flag members...`.
    pub fn dump_text(&self) -> String {
        let mut s = String::new();
        for q in &self.qubits {
            let role = match q.role {
                Role::Data => "data",
                Role::Measure => "measure",
                Role::Flag => "flag",
            };
            s.push_str(&format!("{} {} {} {}\n", q.id, role, q.x, q.y));
        }
        for st in &self.stabilizers {
            let basis = match st.basis {
                Basis::X => "X",
                Basis::Z => "Z",
            };
            let flag = st.flag.map(|f| f.to_string()).unwrap_or_else(|| "-".into());
            s.push_str(&format!("{} {} {} {}", st.id, basis, st.measure, flag));
            for m in &st.members {
                s.push_str(&format!(" {m}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Construct the layout for a code instance. Deterministic: ids are assigned
/// row-major by (y, x).
pub fn build_layout(spec: CodeSpec) -> Result<QubitLayout, LayoutError> {
    if spec.distance < 3 || spec.distance % 2 == 0 {
        return Err(LayoutError::BadDistance(spec.distance));
    }
    Ok(match spec.kind {
        CodeKind::Surface => build_surface(spec),
        CodeKind::Colour => build_colour(spec),
    })
}

/// Affine map of stabilizer positions onto [-0.5, 0.5]^2, per axis. A patch
/// edge maps to +-0.5; a degenerate (zero-extent) axis maps to 0.
pub fn normalized_positions(layout: &QubitLayout) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = layout.stabilizers.iter().map(|s| s.x).collect();
    let ys: Vec<f64> = layout.stabilizers.iter().map(|s| s.y).collect();
    let norm = |v: &[f64]| -> Vec<f64> {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= 0.0 {
            return vec![0.0; v.len()];
        }
        v.iter().map(|&x| (x - lo) / (hi - lo) - 0.5).collect()
    };
    let nx = norm(&xs);
    let ny = norm(&ys);
    nx.into_iter().zip(ny).collect()
}

/// Direction offsets from a surface measure qubit to its data neighbours,
/// in the per-class readout order. X-class plaquettes touch NE, SE, NW, SW;
/// Z-class plaquettes touch NE, NW, SE, SW. Adjacent plaquettes then touch
/// shared data qubits in the same temporal order, and hook errors land
/// perpendicular to the same-type logical operator.
pub const SURFACE_ORDER_X: [(i64, i64); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
pub const SURFACE_ORDER_Z: [(i64, i64); 4] = [(1, 1), (-1, 1), (1, -1), (-1, -1)];

fn build_surface(spec: CodeSpec) -> QubitLayout {
    let d = spec.distance as i64;
    // Collect positions first, then assign ids row-major by (y, x).
    let mut positions: Vec<(i64, i64, Role)> = Vec::new();
    for r in 0..d {
        for c in 0..d {
            positions.push((2 * c + 1, 2 * r + 1, Role::Data));
        }
    }
    let mut stab_pos: Vec<(i64, i64, Basis)> = Vec::new();
    for b in 0..=d {
        for a in 0..=d {
            let class_x = (a + b) % 2 == 0;
            let interior_a = a >= 1 && a <= d - 1;
            let interior_b = b >= 1 && b <= d - 1;
            let keep = if interior_a && interior_b {
                true
            } else if (b == 0 || b == d) && interior_a {
                // Top/bottom boundary rows host only Z-type halves.
                !class_x
            } else if (a == 0 || a == d) && interior_b {
                // Left/right boundary columns host only X-type halves.
                class_x
            } else {
                false
            };
            if keep {
                positions.push((2 * a, 2 * b, Role::Measure));
                stab_pos.push((2 * a, 2 * b, if class_x { Basis::X } else { Basis::Z }));
            }
        }
    }
    positions.sort_by_key(|&(x, y, _)| (y, x));
    let id_of = |x: i64, y: i64| -> u32 {
        positions.iter().position(|&(px, py, _)| px == x && py == y).unwrap() as u32
    };
    let qubits: Vec<Qubit> = positions
        .iter()
        .enumerate()
        .map(|(i, &(x, y, role))| Qubit { id: i as u32, x: x as f64, y: y as f64, role })
        .collect();

    stab_pos.sort_by_key(|&(x, y, _)| (y, x));
    let in_data = |x: i64, y: i64| x >= 1 && x <= 2 * d - 1 && y >= 1 && y <= 2 * d - 1;
    let stabilizers: Vec<Stabilizer> = stab_pos
        .iter()
        .enumerate()
        .map(|(i, &(x, y, basis))| {
            let mut members: Vec<u32> = [(1, 1), (-1, 1), (1, -1), (-1, -1)]
                .iter()
                .filter(|&&(dx, dy)| in_data(x + dx, y + dy))
                .map(|&(dx, dy)| id_of(x + dx, y + dy))
                .collect();
            members.sort_unstable();
            Stabilizer {
                id: i as u32,
                basis,
                members,
                measure: id_of(x, y),
                flag: None,
                x: x as f64,
                y: y as f64,
            }
        })
        .collect();

    // Memory-Z observable: leftmost data column. Memory-X: bottom data row.
    let support: Vec<u32> = match spec.basis {
        Basis::Z => (0..d).map(|r| id_of(1, 2 * r + 1)).collect(),
        Basis::X => (0..d).map(|c| id_of(2 * c + 1, 1)).collect(),
    };

    QubitLayout { spec, qubits, stabilizers, observable_support: vec![support] }
}

/// Coupling directions for colour-code cells: the measure ancilla couples the
/// E, NE, NW members, the flag ancilla the W, SW, SE members, one layer per
/// direction pair. The pairing is chosen so no data qubit is touched twice in
/// one layer anywhere on the lattice.
pub const COLOUR_ORDER_MEASURE: [(i64, i64); 3] = [(2, 0), (1, 1), (-1, 1)];
pub const COLOUR_ORDER_FLAG: [(i64, i64); 3] = [(-2, 0), (-1, -1), (1, -1)];

fn build_colour(spec: CodeSpec) -> QubitLayout {
    let m = (spec.distance as i64 - 1) / 2;
    // Internal coordinates before the canonical shift: base-left corner at
    // (-2, 0), base-right at (6m-2, 0), apex at (3m-2, 3m).
    let in_region = |x: i64, y: i64| y >= 0 && y <= x + 2 && y <= 6 * m - 2 - x;
    let hex_offsets = [(-2, 0), (2, 0), (-1, 1), (1, 1), (-1, -1), (1, -1)];

    let mut cells: Vec<(i64, i64, Vec<(i64, i64)>)> = Vec::new();
    for j in 0..=2 * m {
        let cx = 3 * j;
        let cy_min = j % 2;
        let mut cy = cy_min;
        while cy <= 3 * m {
            let verts: Vec<(i64, i64)> = hex_offsets
                .iter()
                .map(|&(dx, dy)| (cx + dx, cy + dy))
                .filter(|&(x, y)| in_region(x, y))
                .collect();
            if verts.len() >= 4 {
                assert!(
                    verts.len() == 4 || verts.len() == 6,
                    "colour cell at ({cx},{cy}) truncated to {} members",
                    verts.len()
                );
                cells.push((cx, cy, verts));
            }
            cy += 2;
        }
    }
    cells.sort_by_key(|&(x, y, _)| (y, x));

    let mut data_pos: Vec<(i64, i64)> = cells.iter().flat_map(|(_, _, v)| v.iter().cloned()).collect();
    data_pos.sort_by_key(|&(x, y)| (y, x));
    data_pos.dedup();

    // Ancillas at the cell center, offset +-1/2 in x so ids stay distinct.
    // Sort order: row-major by (y, x) over all qubits, half-offsets included.
    #[derive(Clone, Copy)]
    enum Pos {
        Data(i64, i64),
        Anc(i64, i64, bool), // center, is_flag
    }
    let mut all: Vec<Pos> = data_pos.iter().map(|&(x, y)| Pos::Data(x, y)).collect();
    for &(cx, cy, _) in &cells {
        all.push(Pos::Anc(cx, cy, false));
        all.push(Pos::Anc(cx, cy, true));
    }
    let key = |p: &Pos| -> (i64, i64) {
        match *p {
            Pos::Data(x, y) => (y, 2 * x),
            Pos::Anc(cx, cy, flag) => (cy, 2 * cx + if flag { 1 } else { -1 }),
        }
    };
    all.sort_by_key(key);

    let shift = 2.0; // canonical x >= 0 coordinates
    let qubits: Vec<Qubit> = all
        .iter()
        .enumerate()
        .map(|(i, p)| match *p {
            Pos::Data(x, y) => Qubit { id: i as u32, x: x as f64 + shift, y: y as f64, role: Role::Data },
            Pos::Anc(cx, cy, flag) => Qubit {
                id: i as u32,
                x: cx as f64 + shift + if flag { 0.5 } else { -0.5 },
                y: cy as f64,
                role: if flag { Role::Flag } else { Role::Measure },
            },
        })
        .collect();

    let data_id = |x: i64, y: i64| -> u32 {
        let fx = x as f64 + shift;
        qubits
            .iter()
            .position(|q| q.role == Role::Data && q.x == fx && q.y == y as f64)
            .unwrap() as u32
    };
    let anc_id = |cx: i64, cy: i64, flag: bool| -> u32 {
        let fx = cx as f64 + shift + if flag { 0.5 } else { -0.5 };
        qubits.iter().position(|q| q.x == fx && q.y == cy as f64 && q.role != Role::Data).unwrap()
            as u32
    };

    // Two stabilizers per cell, X slot first, sharing the cell's ancillas.
    let mut stabilizers = Vec::with_capacity(2 * cells.len());
    for (ci, (cx, cy, verts)) in cells.iter().enumerate() {
        let mut members: Vec<u32> = verts.iter().map(|&(x, y)| data_id(x, y)).collect();
        members.sort_unstable();
        for (k, basis) in [Basis::X, Basis::Z].into_iter().enumerate() {
            stabilizers.push(Stabilizer {
                id: (2 * ci + k) as u32,
                basis,
                members: members.clone(),
                measure: anc_id(*cx, *cy, false),
                flag: Some(anc_id(*cx, *cy, true)),
                x: *cx as f64 + shift,
                y: *cy as f64,
            });
        }
    }

    // Observable support: the base side of the triangle (same support in both
    // bases; the colour code is self-dual).
    let support: Vec<u32> = data_pos.iter().filter(|&&(_, y)| y == 0).map(|&(x, y)| data_id(x, y)).collect();
    assert_eq!(support.len(), spec.distance as usize);

    QubitLayout { spec, qubits, stabilizers, observable_support: vec![support] }
}

/// Checkerboard colour of a surface data qubit at `(2c+1, 2r+1)`: qubits with
/// colour 1 are the ones read out in the X basis during a memory-Z experiment
/// (the XZZX local frame), and vice versa for memory-X.
pub fn surface_data_colour(x: f64, y: f64) -> u8 {
    let c = ((x as i64) - 1) / 2;
    let r = ((y as i64) - 1) / 2;
    ((c + r) % 2) as u8
}
