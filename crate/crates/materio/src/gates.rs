//! The 16 two-input Boolean functions.
//!
//! A gate is identified by its truth row over the four input corners
//! ordered (FF, FT, TF, TT). Ids run 1..=16 with
//! `id = 1 + FF + 2*FT + 4*TF + 8*TT`, the conventional census ordering.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GateType {
    pub id: u8,
    pub truth_row: [bool; 4],
}

/// Long names, indexed by `id - 1`.
const NAMES: [&str; 16] = [
    "Constant False",
    "x NOR y",
    "NOT x AND y",
    "NOT x",
    "x AND NOT y",
    "NOT y",
    "x XOR y",
    "x NAND y",
    "x AND y",
    "x XNOR y",
    "y",
    "NOT x AND NOT y OR y",
    "x",
    "x OR NOT y",
    "x OR y",
    "Constant True",
];

/// Short tokens used in hierarchy strings and CLI gate lists.
const SHORT_NAMES: [&str; 16] = [
    "FALSE", "NOR", "NOTX_AND_Y", "NOT_X", "X_AND_NOTY", "NOT_Y", "XOR", "NAND", "AND", "XNOR",
    "Y", "X_IMPLIES_Y", "X", "Y_IMPLIES_X", "OR", "TRUE",
];

impl GateType {
    pub const CONSTANT_FALSE: GateType = GateType::from_id_const(1);
    pub const NOR: GateType = GateType::from_id_const(2);
    pub const XOR: GateType = GateType::from_id_const(7);
    pub const NAND: GateType = GateType::from_id_const(8);
    pub const AND: GateType = GateType::from_id_const(9);
    pub const XNOR: GateType = GateType::from_id_const(10);
    pub const OR: GateType = GateType::from_id_const(15);
    pub const CONSTANT_TRUE: GateType = GateType::from_id_const(16);

    const fn from_id_const(id: u8) -> GateType {
        let bits = id - 1;
        GateType {
            id,
            truth_row: [
                bits & 1 != 0,
                bits & 2 != 0,
                bits & 4 != 0,
                bits & 8 != 0,
            ],
        }
    }

    /// All 16 gates in id order.
    pub fn all() -> [GateType; 16] {
        let mut out = [GateType::CONSTANT_FALSE; 16];
        let mut id = 1u8;
        for slot in out.iter_mut() {
            *slot = GateType::from_id_const(id);
            id += 1;
        }
        out
    }

    pub fn from_id(id: u8) -> Result<GateType> {
        if (1..=16).contains(&id) {
            Ok(GateType::from_id_const(id))
        } else {
            Err(Error::invalid(format!("gate id {id} outside 1..=16")))
        }
    }

    /// Total over all 16 possible rows.
    pub fn from_truth_row(row: [bool; 4]) -> GateType {
        let bits =
            row[0] as u8 | (row[1] as u8) << 1 | (row[2] as u8) << 2 | (row[3] as u8) << 3;
        GateType::from_id_const(bits + 1)
    }

    pub fn name(&self) -> &'static str {
        NAMES[(self.id - 1) as usize]
    }

    pub fn short_name(&self) -> &'static str {
        SHORT_NAMES[(self.id - 1) as usize]
    }

    /// Gate obtained by swapping the two inputs (FT and TF rows exchange).
    pub fn swap_inputs(&self) -> GateType {
        let r = self.truth_row;
        GateType::from_truth_row([r[0], r[2], r[1], r[3]])
    }

    /// Parses a short token such as `AND` or `XNOR` (case-insensitive).
    pub fn parse_short(name: &str) -> Result<GateType> {
        let upper = name.to_ascii_uppercase();
        for gate in GateType::all() {
            if gate.short_name() == upper {
                return Ok(gate);
            }
        }
        Err(Error::UnknownGate {
            name: name.to_string(),
            valid: SHORT_NAMES.join(", "),
        })
    }

    /// The six symmetric gates the configuration search targets.
    pub fn searchable() -> [GateType; 6] {
        [
            GateType::AND,
            GateType::OR,
            GateType::NAND,
            GateType::NOR,
            GateType::XOR,
            GateType::XNOR,
        ]
    }
}

impl fmt::Display for GateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Debug for GateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GateType({}, {})", self.id, self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_biject_with_truth_rows() {
        let mut seen = [false; 16];
        for a in [false, true] {
            for b in [false, true] {
                for c in [false, true] {
                    for d in [false, true] {
                        let gate = GateType::from_truth_row([a, b, c, d]);
                        assert_eq!(gate.truth_row, [a, b, c, d]);
                        assert!(!seen[(gate.id - 1) as usize], "duplicate id {}", gate.id);
                        seen[(gate.id - 1) as usize] = true;
                    }
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn census_rows_match_expected_names() {
        assert_eq!(GateType::from_truth_row([false, false, false, true]).id, 9);
        assert_eq!(GateType::from_truth_row([false, false, false, true]).name(), "x AND y");
        assert_eq!(GateType::from_truth_row([false, false, false, false]).id, 1);
        assert_eq!(
            GateType::from_truth_row([false, false, false, false]).name(),
            "Constant False"
        );
        assert_eq!(GateType::from_truth_row([false, true, true, false]).id, 7);
        assert_eq!(GateType::from_truth_row([false, true, true, false]).name(), "x XOR y");
        assert_eq!(GateType::from_truth_row([true, true, true, false]).name(), "x NAND y");
        assert_eq!(GateType::from_truth_row([false, true, true, true]).name(), "x OR y");
        assert_eq!(GateType::from_truth_row([true, false, false, true]).name(), "x XNOR y");
        assert_eq!(GateType::from_truth_row([true, false, false, false]).name(), "x NOR y");
    }

    #[test]
    fn swap_inputs_exchanges_asymmetric_pair() {
        // "NOT x AND y" (row 3) <-> "x AND NOT y" (row 5)
        let not_x_and_y = GateType::from_id(3).unwrap();
        let x_and_not_y = GateType::from_id(5).unwrap();
        assert_eq!(not_x_and_y.swap_inputs(), x_and_not_y);
        assert_eq!(x_and_not_y.swap_inputs(), not_x_and_y);
        // symmetric gates are fixed points
        for gate in GateType::searchable() {
            assert_eq!(gate.swap_inputs(), gate);
        }
    }

    #[test]
    fn parse_short_round_trips_and_rejects_unknown() {
        for gate in GateType::all() {
            assert_eq!(GateType::parse_short(gate.short_name()).unwrap(), gate);
        }
        assert_eq!(GateType::parse_short("and").unwrap(), GateType::AND);
        let err = GateType::parse_short("IMPLIES2").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("IMPLIES2") && msg.contains("XOR"), "{msg}");
    }
}
