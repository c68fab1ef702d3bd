//! Wigner small-d matrix at `β = π/2`.
//!
//! All angular momenta are passed doubled (`two_j = 2J`) so that
//! half-integer values stay integral. Columns are generated by a three-term
//! recurrence in `M` seeded at `M = J`, running towards the centre only and
//! completed by the reflection `d_{-M,M'} = (-1)^{J-M'} d_{M,M'}`. That keeps
//! the recursion in its growing direction and avoids the cancellation of
//! the explicit alternating sum.

use std::sync::OnceLock;

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Largest doubled angular momentum accepted.
pub const MAX_TWO_J: u32 = 1024;

fn check_quantum_numbers(two_j: u32, two_m: i64, two_mp: i64) -> Result<()> {
    let j = i64::from(two_j);
    for (name, v) in [("2M", two_m), ("2M'", two_mp)] {
        if v.abs() > j || (v - j).rem_euclid(2) != 0 {
            return Err(Error::InvalidParameter(format!(
                "{name} = {v} incompatible with 2J = {two_j}"
            )));
        }
    }
    if two_j > MAX_TWO_J {
        return Err(Error::Capacity {
            what: "2J",
            requested: two_j as usize,
            cap: MAX_TWO_J as usize,
        });
    }
    Ok(())
}

/// Column `M'` of `d^J(π/2)`, indexed by `(2M + 2J)/2`.
fn column(two_j: u32, two_mp: i64) -> Vec<f64> {
    let tj = i64::from(two_j);
    let dim = two_j as usize + 1;
    let idx = |two_m: i64| ((two_m + tj) / 2) as usize;
    let j = tj as f64 / 2.0;
    let mp = two_mp as f64 / 2.0;

    let mut v = vec![0.0; dim];
    let sign = if ((tj - two_mp) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    // d_{J,M'} = (-1)^{J-M'} 2^{-J} √C(2J, J+M')
    let ln_seed = 0.5 * ln_binomial(two_j as u64, ((tj + two_mp) / 2) as u64) - j * std::f64::consts::LN_2;
    v[dim - 1] = sign * ln_seed.exp();

    let lowest = tj % 2;
    let mut two_m = tj;
    while two_m > lowest {
        let m = two_m as f64 / 2.0;
        let above = if two_m < tj { v[idx(two_m + 2)] } else { 0.0 };
        let up = ((j - m) * (j + m + 1.0)).sqrt();
        let down = ((j + m) * (j - m + 1.0)).sqrt();
        v[idx(two_m - 2)] = (2.0 * mp * v[idx(two_m)] - up * above) / down;
        two_m -= 2;
    }
    for two_m in (-tj..0).step_by(2) {
        v[idx(two_m)] = sign * v[idx(-two_m)];
    }
    v
}

/// `d^J_{M,M'}(π/2)` for one entry.
pub fn wigner_d_half_pi(two_j: u32, two_m: i64, two_mp: i64) -> Result<f64> {
    check_quantum_numbers(two_j, two_m, two_mp)?;
    Ok(column(two_j, two_mp)[((two_m + i64::from(two_j)) / 2) as usize])
}

/// Full `(2J+1)×(2J+1)` matrix `d^J(π/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerTable {
    two_j: u32,
    /// Column-major: entry `(M, M')` at `col(M') * dim + row(M)`.
    values: Vec<f64>,
}

impl WignerTable {
    pub fn new(two_j: u32) -> Result<Self> {
        check_quantum_numbers(two_j, i64::from(two_j), i64::from(two_j))?;
        let tj = i64::from(two_j);
        let values = (-tj..=tj).step_by(2).flat_map(|two_mp| column(two_j, two_mp)).collect();
        Ok(Self { two_j, values })
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// `d^J_{M,M'}` by doubled indices; panics when out of range.
    pub fn get(&self, two_m: i64, two_mp: i64) -> f64 {
        let tj = i64::from(self.two_j);
        debug_assert!(two_m.abs() <= tj && two_mp.abs() <= tj);
        let row = ((two_m + tj) / 2) as usize;
        let col = ((two_mp + tj) / 2) as usize;
        self.values[col * self.dim() + row]
    }

    /// Column `M'` as a slice ordered by increasing `M`.
    pub fn column(&self, two_mp: i64) -> &[f64] {
        let col = ((two_mp + i64::from(self.two_j)) / 2) as usize;
        &self.values[col * self.dim()..(col + 1) * self.dim()]
    }
}

/// Lazily built tables for every `2J ≤ max_two_j`, shareable across threads.
#[derive(Debug)]
pub struct WignerCache {
    tables: Vec<OnceLock<WignerTable>>,
}

impl WignerCache {
    pub fn new(max_two_j: u32) -> Result<Self> {
        if max_two_j > MAX_TWO_J {
            return Err(Error::Capacity {
                what: "2J",
                requested: max_two_j as usize,
                cap: MAX_TWO_J as usize,
            });
        }
        Ok(Self {
            tables: (0..=max_two_j).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn max_two_j(&self) -> u32 {
        (self.tables.len() - 1) as u32
    }

    pub fn table(&self, two_j: u32) -> Result<&WignerTable> {
        let slot = self.tables.get(two_j as usize).ok_or(Error::Capacity {
            what: "2J in cache",
            requested: two_j as usize,
            cap: self.max_two_j() as usize,
        })?;
        if let Some(t) = slot.get() {
            return Ok(t);
        }
        let built = WignerTable::new(two_j)?;
        Ok(slot.get_or_init(|| built))
    }
}
