//! Discrete Morse function validation.

use serde::Serialize;
use thiserror::Error;

use crate::complex::{CellId, Complex};
use crate::function::{CellFunction, FunctionError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MorseCondition {
    M1,
    M2,
    M3,
    M4,
}

/// A failed condition at `cell`, with the cells that witness it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MorseViolation {
    pub cell: CellId,
    pub condition: MorseCondition,
    pub witnesses: Vec<CellId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MorseVerdict {
    pub violations: Vec<MorseViolation>,
}

impl MorseVerdict {
    pub fn is_morse(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn of(&self, condition: MorseCondition) -> impl Iterator<Item = &MorseViolation> {
        self.violations
            .iter()
            .filter(move |v| v.condition == condition)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorseError {
    #[error(transparent)]
    Domain(#[from] FunctionError),
    #[error("function is not discrete Morse")]
    NotMorse,
}

fn violations_at(k: &Complex, f: &CellFunction, s: CellId) -> Vec<MorseViolation> {
    let mut out = Vec::new();
    let irr_up: Vec<CellId> = k
        .cofacet_coverings(s)
        .filter(|cv| !cv.regular && f.value(s) >= f.value(cv.cell))
        .map(|cv| cv.cell)
        .collect();
    if !irr_up.is_empty() {
        out.push(MorseViolation {
            cell: s,
            condition: MorseCondition::M1,
            witnesses: irr_up,
        });
    }
    let up: Vec<CellId> = f.nc_cofacets(k, s).collect();
    if up.len() > 1 {
        out.push(MorseViolation {
            cell: s,
            condition: MorseCondition::M2,
            witnesses: up,
        });
    }
    let irr_down: Vec<CellId> = k
        .facet_coverings(s)
        .filter(|cv| !cv.regular && f.value(cv.face) >= f.value(s))
        .map(|cv| cv.face)
        .collect();
    if !irr_down.is_empty() {
        out.push(MorseViolation {
            cell: s,
            condition: MorseCondition::M3,
            witnesses: irr_down,
        });
    }
    let down: Vec<CellId> = f.nc_facets(k, s).collect();
    if down.len() > 1 {
        out.push(MorseViolation {
            cell: s,
            condition: MorseCondition::M4,
            witnesses: down,
        });
    }
    out
}

/// Checks (M1)–(M4) on every cell and reports all violations.
///
/// M1 and M3 range over irregular facets only.
pub fn check_morse(k: &Complex, f: &CellFunction) -> Result<MorseVerdict, MorseError> {
    f.check_domain(k)?;
    let cells: Vec<CellId> = k.cells().collect();
    let violations = crate::par::flat_map(&cells, |&s| violations_at(k, f, s));
    Ok(MorseVerdict { violations })
}

/// Confirms `U(σ) + D(σ) ≤ 1` for a Morse function; the error carries the first offending cell.
pub fn check_u_plus_d(k: &Complex, f: &CellFunction) -> Result<Result<(), CellId>, MorseError> {
    if !check_morse(k, f)?.is_morse() {
        return Err(MorseError::NotMorse);
    }
    Ok(match k.cells().find(|&s| f.up(k, s) + f.down(k, s) > 1) {
        Some(s) => Err(s),
        None => Ok(()),
    })
}

/// Critical cells grouped by dimension.
pub fn critical_cells(k: &Complex, f: &CellFunction) -> Vec<Vec<CellId>> {
    let top = k.max_dim().map_or(0, |d| d + 1);
    (0..top)
        .map(|d| {
            k.cells_of_dim(d)
                .iter()
                .copied()
                .filter(|&s| f.is_critical(k, s))
                .collect()
        })
        .collect()
}

/// `m_k`, the number of critical `k`-cells.
pub fn m_counts(k: &Complex, f: &CellFunction) -> Vec<usize> {
    critical_cells(k, f).iter().map(Vec::len).collect()
}
