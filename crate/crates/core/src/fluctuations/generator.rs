use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{monomial_operator, FockBasis, Statistics};
use crate::numerics::{ModeModel, SparseMatrix};
use crate::C64;

/// Normal-ordered monomial a*_{c₁}…a*_{c_k} a_{d₁}…a_{d_l}; indices sorted (bosons commute).
type Key = (Vec<usize>, Vec<usize>);

/// Bosonic polynomial in normal order, stored as coefficient per monomial.
#[derive(Clone, Debug, Default)]
pub struct NormalPolynomial {
    terms: BTreeMap<Key, C64>,
}

impl NormalPolynomial {
    pub fn add(&mut self, coef: C64, mut creators: Vec<usize>, mut annihilators: Vec<usize>) {
        if coef == C64::new(0.0, 0.0) {
            return;
        }
        creators.sort_unstable();
        annihilators.sort_unstable();
        *self.terms.entry((creators, annihilators)).or_insert(C64::new(0.0, 0.0)) += coef;
    }

    /// dΓ(h) + ½ Σ W_xy a*_x a*_y a_y a_x.
    pub fn hamiltonian(model: &ModeModel) -> Self {
        let m = model.modes();
        let mut p = NormalPolynomial::default();
        for x in 0..m {
            for y in 0..m {
                p.add(model.one_body[(x, y)], vec![x], vec![y]);
                p.add(C64::new(0.5 * model.pair[(x, y)], 0.0), vec![x, y], vec![y, x]);
            }
        }
        p
    }

    /// Substitutes a_x → a_x + α_x (and a*_x → a*_x + ᾱ_x), keeping normal order.
    pub fn shifted(&self, alpha: &[C64]) -> Self {
        let mut out = NormalPolynomial::default();
        for ((cr, an), &coef) in &self.terms {
            let k = cr.len() + an.len();
            for mask in 0u32..(1 << k) {
                let mut c = coef;
                let mut keep_cr = Vec::new();
                let mut keep_an = Vec::new();
                for (i, &x) in cr.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        c *= alpha[x].conj();
                    } else {
                        keep_cr.push(x);
                    }
                }
                for (i, &x) in an.iter().enumerate() {
                    if mask & (1 << (cr.len() + i)) != 0 {
                        c *= alpha[x];
                    } else {
                        keep_an.push(x);
                    }
                }
                out.add(c, keep_cr, keep_an);
            }
        }
        out
    }

    /// Coefficients of a*_x (degree-one creator terms).
    pub fn linear_creation(&self, m: usize) -> Vec<C64> {
        let mut l = vec![C64::new(0.0, 0.0); m];
        for ((cr, an), &c) in &self.terms {
            if cr.len() == 1 && an.is_empty() {
                l[cr[0]] += c;
            }
        }
        l
    }

    /// Sparse operator on `basis`, dropping the constant term.
    pub fn operator(&self, basis: &FockBasis) -> Result<SparseMatrix> {
        let terms: Vec<(C64, Vec<(usize, bool)>)> = self
            .terms
            .iter()
            .filter(|((cr, an), _)| !(cr.is_empty() && an.is_empty()))
            .map(|((cr, an), &c)| {
                let mut word: Vec<(usize, bool)> = cr.iter().map(|&x| (x, true)).collect();
                word.extend(an.iter().map(|&x| (x, false)));
                (c, word)
            })
            .collect();
        monomial_operator(basis, &terms)
    }

    pub fn degree_counts(&self) -> [usize; 5] {
        let mut d = [0; 5];
        for (cr, an) in self.terms.keys() {
            d[(cr.len() + an.len()).min(4)] += 1;
        }
        d
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearReport {
    /// ℓ with the linear part a*(ℓ) + a(ℓ).
    pub coefficient: Vec<(f64, f64)>,
    pub norm: f64,
}

/// Fluctuation generator L_N = W*(H_N - i∂_t)W around W = W(√N c_t).
pub struct FluctuationGenerator {
    pub polynomial: NormalPolynomial,
    pub linear: LinearReport,
}

/// Shifts the Fock Hamiltonian of `model` (pair = the interaction actually used between
/// particles, e.g. V/N or N²V(N·)) by √N c and adds the Weyl time-derivative term
/// i(∂_tW*)W = i(a(√N ċ) - a*(√N ċ)). `dc_dt` must come from the trajectory itself.
pub fn generator_ln(model: &ModeModel, c: &[C64], dc_dt: &[C64], n: usize) -> Result<FluctuationGenerator> {
    let m = model.modes();
    if c.len() != m || dc_dt.len() != m {
        return Err(Error::Shape(format!("condensate data must have {m} entries")));
    }
    let sq = (n as f64).sqrt();
    let alpha: Vec<C64> = c.iter().map(|z| z * sq).collect();
    let mut poly = NormalPolynomial::hamiltonian(model).shifted(&alpha);
    let i = C64::new(0.0, 1.0);
    for x in 0..m {
        let d = dc_dt[x] * sq;
        poly.add(-i * d, vec![x], vec![]);
        poly.add(i * d.conj(), vec![], vec![x]);
    }
    let l = poly.linear_creation(m);
    let norm = l.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(FluctuationGenerator {
        polynomial: poly,
        linear: LinearReport { coefficient: l.iter().map(|z| (z.re, z.im)).collect(), norm },
    })
}

impl FluctuationGenerator {
    /// Assembled on a capped bosonic basis holding at least the quartic terms.
    pub fn operator(&self, basis: &FockBasis) -> Result<SparseMatrix> {
        if basis.statistics() != Statistics::Boson || basis.sector().is_some() {
            return Err(Error::Contract("fluctuation generators act on a capped bosonic basis".into()));
        }
        if basis.max_particles() < 2 {
            return Err(Error::Truncation { leakage: 1.0, threshold: 0.0 });
        }
        self.polynomial.operator(basis)
    }
}
