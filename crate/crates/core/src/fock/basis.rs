use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest basis the enumerator will build.
pub const MAX_BASIS: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

/// Occupation-number basis over `modes` modes, sorted lexicographically.
///
/// Bosons: all n with Σn ≤ `max_particles`, or Σn = N for a fixed sector.
/// Fermions: all subsets, or the subsets of size N.
#[derive(Clone, Debug)]
pub struct FockBasis {
    stats: Statistics,
    modes: usize,
    max_particles: usize,
    sector: Option<usize>,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl FockBasis {
    fn build(stats: Statistics, modes: usize, max_particles: usize, sector: Option<usize>) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Contract("Fock basis needs at least one mode".into()));
        }
        let per_mode = match stats {
            Statistics::Boson => max_particles.min(255),
            Statistics::Fermion => 1,
        };
        if stats == Statistics::Boson && max_particles > 255 {
            return Err(Error::Contract("bosonic occupations are capped at 255".into()));
        }
        let size = match (stats, sector) {
            (Statistics::Boson, Some(n)) => binomial(n + modes - 1, n),
            (Statistics::Boson, None) => binomial(max_particles + modes, modes),
            (Statistics::Fermion, Some(n)) => binomial(modes, n),
            (Statistics::Fermion, None) => 2f64.powi(modes as i32),
        };
        if size > MAX_BASIS as f64 {
            return Err(Error::CostGuard(format!(
                "{size:.0} basis states exceed the limit {MAX_BASIS}"
            )));
        }
        let mut states = Vec::with_capacity(size as usize);
        let mut occ = vec![0u8; modes];
        fill(&mut occ, 0, max_particles, per_mode, sector, &mut states);
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(FockBasis { stats, modes, max_particles, sector, states, index })
    }

    /// All bosonic states with at most `n_max` particles.
    pub fn bosons(modes: usize, n_max: usize) -> Result<Self> {
        Self::build(Statistics::Boson, modes, n_max, None)
    }

    /// Bosonic states with exactly `n` particles.
    pub fn bosons_sector(modes: usize, n: usize) -> Result<Self> {
        Self::build(Statistics::Boson, modes, n, Some(n))
    }

    /// All fermionic occupation patterns.
    pub fn fermions(modes: usize) -> Result<Self> {
        if modes > 22 {
            return Err(Error::CostGuard(format!("2^{modes} fermionic states")));
        }
        Self::build(Statistics::Fermion, modes, modes, None)
    }

    /// Fermionic states with exactly `n` particles.
    pub fn fermions_sector(modes: usize, n: usize) -> Result<Self> {
        if n > modes {
            return Err(Error::Contract(format!("{n} fermions do not fit in {modes} modes")));
        }
        Self::build(Statistics::Fermion, modes, n, Some(n))
    }

    pub fn statistics(&self) -> Statistics {
        self.stats
    }
    pub fn modes(&self) -> usize {
        self.modes
    }
    pub fn max_particles(&self) -> usize {
        self.max_particles
    }
    pub fn sector(&self) -> Option<usize> {
        self.sector
    }
    pub fn len(&self) -> usize {
        self.states.len()
    }
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
    pub fn state(&self, i: usize) -> &[u8] {
        &self.states[i]
    }
    pub fn states(&self) -> &[Vec<u8>] {
        &self.states
    }
    pub fn find(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }
    pub fn total(&self, i: usize) -> usize {
        self.states[i].iter().map(|&n| n as usize).sum()
    }

    /// True for states on the truncation shell Σn = N_max of a capped bosonic basis.
    pub fn is_boundary(&self, i: usize) -> bool {
        self.stats == Statistics::Boson && self.sector.is_none() && self.total(i) == self.max_particles
    }

    /// Applies a single ladder operator to `occ` in place and returns its matrix
    /// element, or `None` when the result vanishes.
    ///
    /// Fermionic signs count occupied modes below the target mode. Bosonic creation
    /// is not capped here; out-of-basis results are dropped at lookup time.
    pub fn ladder(&self, occ: &mut [u8], mode: usize, create: bool) -> Option<f64> {
        let n = occ[mode];
        match self.stats {
            Statistics::Boson => {
                if create {
                    if n == u8::MAX {
                        return None;
                    }
                    occ[mode] = n + 1;
                    Some(((n as f64) + 1.0).sqrt())
                } else if n == 0 {
                    None
                } else {
                    occ[mode] = n - 1;
                    Some((n as f64).sqrt())
                }
            }
            Statistics::Fermion => {
                if (create && n == 1) || (!create && n == 0) {
                    return None;
                }
                let below: u32 = occ[..mode].iter().map(|&b| b as u32).sum();
                occ[mode] = if create { 1 } else { 0 };
                Some(if below.is_multiple_of(2) { 1.0 } else { -1.0 })
            }
        }
    }

    /// Occupation string such as `0120`; colon-separated once any occupation reaches 10.
    pub fn label(&self, i: usize) -> String {
        let s = &self.states[i];
        if s.iter().all(|&n| n < 10) {
            s.iter().map(|&n| char::from(b'0' + n)).collect()
        } else {
            s.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(":")
        }
    }
}

fn fill(occ: &mut [u8], mode: usize, rem: usize, per_mode: usize, sector: Option<usize>, out: &mut Vec<Vec<u8>>) {
    if mode == occ.len() {
        let used: usize = occ.iter().map(|&n| n as usize).sum();
        if sector.is_none_or(|n| used == n) {
            out.push(occ.to_vec());
        }
        return;
    }
    let remaining_modes = occ.len() - mode - 1;
    for n in 0..=rem.min(per_mode) {
        if let Some(target) = sector {
            let used: usize = occ[..mode].iter().map(|&k| k as usize).sum::<usize>() + n;
            // the remaining modes must be able to hold what is still missing
            if used > target || (target - used) > remaining_modes * per_mode {
                continue;
            }
        }
        occ[mode] = n as u8;
        fill(occ, mode + 1, rem - n, per_mode, sector, out);
    }
    occ[mode] = 0;
}
