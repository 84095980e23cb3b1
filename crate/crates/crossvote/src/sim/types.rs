//! Identifiers and light-control vocabulary shared by the simulator and the
//! negotiation engine.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(NodeId, "n");
id_type!(SegmentId, "seg");
id_type!(LightId, "TL");
id_type!(IntersectionId, "int");
id_type!(VehicleId, "v");

/// Simulation time in whole seconds (one tick per second).
pub type Tick = u64;

/// The four states a light can take. Amber stops traffic like red; a
/// right-green admits right-turning movements only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LightState {
    Red,
    Green,
    RightGreen,
    Amber,
}

/// How a vehicle moves through an intersection, derived from geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Movement {
    Straight,
    Right,
    Left,
}

impl LightState {
    pub fn permits(self, movement: Movement) -> bool {
        match self {
            LightState::Green => true,
            LightState::RightGreen => movement == Movement::Right,
            LightState::Red | LightState::Amber => false,
        }
    }

    /// Whether this state admits any movement at all; used for conflict checks.
    pub fn is_full_green(self) -> bool {
        self == LightState::Green
    }
}

/// Symmetric boolean matrix over an intersection's approaches; `true` means
/// the two approaches must not be green together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictMatrix(Vec<Vec<bool>>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConflictMatrixError {
    #[error("conflict matrix must be square, row {row} has length {len}")]
    NotSquare { row: usize, len: usize },
    #[error("conflict matrix must be symmetric with a false diagonal at ({i},{j})")]
    NotSymmetric { i: usize, j: usize },
}

impl ConflictMatrix {
    pub fn new(cells: Vec<Vec<bool>>) -> Result<Self, ConflictMatrixError> {
        let n = cells.len();
        for (row, r) in cells.iter().enumerate() {
            if r.len() != n {
                return Err(ConflictMatrixError::NotSquare { row, len: r.len() });
            }
        }
        #[allow(clippy::needless_range_loop)] // indexed form states the symmetry
        for i in 0..n {
            for j in 0..n {
                if cells[i][j] != cells[j][i] || (i == j && cells[i][j]) {
                    return Err(ConflictMatrixError::NotSymmetric { i, j });
                }
            }
        }
        Ok(ConflictMatrix(cells))
    }

    /// Standard four-approach crossing: perpendicular approaches conflict,
    /// opposite ones do not.
    pub fn standard_crossing() -> Self {
        let cells = (0..4)
            .map(|i| (0..4).map(|j| (i + j) % 2 == 1).collect())
            .collect();
        ConflictMatrix(cells)
    }

    /// Two approaches that cross each other (a one-way crossing).
    pub fn two_way_conflict() -> Self {
        ConflictMatrix(vec![vec![false, true], vec![true, false]])
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn conflicts(&self, i: usize, j: usize) -> bool {
        self.0[i][j]
    }
}

/// A complete assignment of states to all lights of one intersection —
/// one bid payload, or one phase of the fixed cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    pub assignments: Vec<(LightId, LightState)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigurationError {
    #[error("configuration does not cover light {0}")]
    MissingLight(LightId),
    #[error("light {0} does not belong to this intersection")]
    ForeignLight(LightId),
    #[error("light {0} assigned more than once")]
    DuplicateLight(LightId),
    #[error("approaches {a} and {b} conflict but are both green")]
    ConflictingGreens { a: LightId, b: LightId },
}

impl Configuration {
    pub fn state_of(&self, light: LightId) -> Option<LightState> {
        self.assignments
            .iter()
            .find(|(l, _)| *l == light)
            .map(|(_, s)| *s)
    }

    /// Check coverage and conflict-freedom against an intersection layout.
    /// `lights` is the approach-ordered light list matching the matrix.
    pub fn validate_for(
        &self,
        lights: &[LightId],
        conflicts: &ConflictMatrix,
    ) -> Result<(), ConfigurationError> {
        let mut seen = std::collections::BTreeSet::new();
        for (light, _) in &self.assignments {
            if !lights.contains(light) {
                return Err(ConfigurationError::ForeignLight(*light));
            }
            if !seen.insert(*light) {
                return Err(ConfigurationError::DuplicateLight(*light));
            }
        }
        for light in lights {
            if !seen.contains(light) {
                return Err(ConfigurationError::MissingLight(*light));
            }
        }
        for i in 0..lights.len() {
            for j in (i + 1)..lights.len() {
                if conflicts.conflicts(i, j) {
                    let a = self.state_of(lights[i]).expect("covered");
                    let b = self.state_of(lights[j]).expect("covered");
                    if a.is_full_green() && b.is_full_green() {
                        return Err(ConfigurationError::ConflictingGreens {
                            a: lights[i],
                            b: lights[j],
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Enumerate the alternation phases of an intersection: every maximal
/// conflict-free green set, greens sorted first by member indices. For a
/// standard crossing this yields exactly the two complementary phases.
pub fn enumerate_phases(lights: &[LightId], conflicts: &ConflictMatrix) -> Vec<Configuration> {
    let n = lights.len();
    assert_eq!(n, conflicts.size(), "lights must match the conflict matrix");
    let independent = |set: u32| -> bool {
        for i in 0..n {
            for j in (i + 1)..n {
                if set & (1 << i) != 0 && set & (1 << j) != 0 && conflicts.conflicts(i, j) {
                    return false;
                }
            }
        }
        true
    };
    let mut greens: Vec<u32> = (1..(1u32 << n))
        .filter(|&set| {
            if !independent(set) {
                return false;
            }
            // maximal: no superset with one more light is still independent
            (0..n).all(|i| set & (1 << i) != 0 || !independent(set | (1 << i)))
        })
        .collect();
    // lexicographic by ascending member indices: lowest included index first
    greens.sort_by_key(|&set| {
        let members: Vec<usize> = (0..n).filter(|i| set & (1 << i) != 0).collect();
        members
    });
    greens
        .into_iter()
        .map(|set| Configuration {
            assignments: lights
                .iter()
                .enumerate()
                .map(|(i, &l)| {
                    let state = if set & (1 << i) != 0 {
                        LightState::Green
                    } else {
                        LightState::Red
                    };
                    (l, state)
                })
                .collect(),
        })
        .collect()
}
