//! Recombination of variant results into the uncut output distribution.
//!
//! Every cut wire is replaced by `1/2 * sum_M tr(M rho) M` over the Paulis
//! `M`. Upstream, `tr(M rho)` is the signed outcome of measuring `M`;
//! downstream, `M` is prepared as a signed mix of eigenstates:
//! `I = P0 + P1`, `Z = P0 - P1`, `X = 2P+ - P0 - P1`, `Y = 2Pi - P0 - P1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::Distribution;
use crate::cutter::{Basis, CutPoint, InitState, SubcircuitSpec};
use crate::error::{Error, Result};
use crate::par;
use crate::sim::VariantResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Upstream,
    Downstream,
}

/// One unit's contribution for every Pauli labelling of its cut ends.
///
/// `terms[l]` is a signed vector over the unit's output bits, where `l`
/// encodes one label per entry of `cuts` in base 4 (first cut lowest) with
/// `I, X, Y, Z = 0, 1, 2, 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutTerms {
    pub cuts: Vec<(CutPoint, Role)>,
    pub output_map: Vec<usize>,
    pub n_bits: usize,
    pub terms: Vec<Vec<f64>>,
}

fn label_index(labels: &[Basis]) -> usize {
    labels.iter().rev().fold(0, |acc, &b| acc * 4 + b as usize)
}

fn digit(index: usize, k: usize) -> usize {
    (index >> (2 * k)) & 3
}

impl CutTerms {
    pub fn term(&self, labels: &[Basis]) -> &[f64] {
        &self.terms[label_index(labels)]
    }
}

/// Weight of preparation `s` in the downstream operator for label `m`.
fn prep_weight(m: Basis, s: InitState) -> f64 {
    use InitState::*;
    match (m, s) {
        (Basis::I, Zero | One) => 1.0,
        (Basis::Z, Zero) => 1.0,
        (Basis::Z, One) => -1.0,
        (Basis::X | Basis::Y, Zero | One) => -1.0,
        (Basis::X, Plus) | (Basis::Y, PlusI) => 2.0,
        _ => 0.0,
    }
}

/// Build a unit's label table from its physical variant results.
pub fn attribute(spec: &SubcircuitSpec, results: &[VariantResult]) -> Result<CutTerms> {
    let (u, d) = (spec.upstream_cuts.len(), spec.downstream_cuts.len());
    let n_bits = spec.n_outputs();
    let mut by_key: BTreeMap<(Vec<Basis>, Vec<InitState>), &VariantResult> = BTreeMap::new();
    for r in results {
        if r.n_outputs != n_bits || r.bases.len() != u || r.inits.len() != d {
            return Err(Error::Structural(format!(
                "variant result shape does not match spec {}",
                spec.id
            )));
        }
        let phys: Vec<Basis> = r.bases.iter().map(|b| b.physical()).collect();
        by_key.insert((phys, r.inits.clone()), r);
    }
    let lookup = |bases: &[Basis], inits: &[InitState]| -> Result<&VariantResult> {
        let phys: Vec<Basis> = bases.iter().map(|b| b.physical()).collect();
        by_key.get(&(phys, inits.to_vec())).copied().ok_or_else(|| {
            Error::MissingVariant(format!("spec {} bases {bases:?} inits {inits:?}", spec.id))
        })
    };

    let total = 1usize << (2 * (u + d));
    let mut terms = Vec::with_capacity(total);
    for l in 0..total {
        let up: Vec<Basis> = (0..u).map(|k| Basis::ALL[digit(l, k)]).collect();
        let down: Vec<Basis> = (0..d).map(|k| Basis::ALL[digit(l, u + k)]).collect();
        let mut acc = vec![0.0; 1 << n_bits];
        for s in 0..1usize << (2 * d) {
            let inits: Vec<InitState> = (0..d).map(|k| InitState::ALL[digit(s, k)]).collect();
            let w: f64 = down.iter().zip(&inits).map(|(&m, &i)| prep_weight(m, i)).product();
            if w == 0.0 {
                continue;
            }
            let signed = lookup(&up, &inits)?.signed(&up);
            for (a, x) in acc.iter_mut().zip(&signed) {
                *a += w * x;
            }
        }
        terms.push(acc);
    }
    let mut cuts: Vec<(CutPoint, Role)> = spec.upstream_cuts.iter().map(|r| (r.cut, Role::Upstream)).collect();
    cuts.extend(spec.downstream_cuts.iter().map(|r| (r.cut, Role::Downstream)));
    Ok(CutTerms {
        cuts,
        output_map: spec.output_map.clone(),
        n_bits,
        terms,
    })
}

fn check_structure(terms: &[CutTerms], n_outputs: usize) -> Result<()> {
    let mut ends: BTreeMap<CutPoint, [usize; 2]> = BTreeMap::new();
    for t in terms {
        if t.terms.len() != 1 << (2 * t.cuts.len()) || t.output_map.len() != t.n_bits {
            return Err(Error::Structural("label table has the wrong size".into()));
        }
        for &(c, role) in &t.cuts {
            ends.entry(c).or_default()[role as usize] += 1;
        }
    }
    if let Some((c, _)) = ends.iter().find(|(_, e)| **e != [1, 1]) {
        return Err(Error::Structural(format!(
            "cut {c:?} needs exactly one upstream and one downstream end"
        )));
    }
    let mut seen = vec![false; n_outputs];
    for &b in terms.iter().flat_map(|t| &t.output_map) {
        if b >= n_outputs || std::mem::replace(&mut seen[b], true) {
            return Err(Error::Structural(format!("output bit {b} missing or claimed twice")));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Structural("some output bit belongs to no unit".into()));
    }
    Ok(())
}

/// Contract all units in index order.
pub fn recombine(terms: &[CutTerms], n_outputs: usize) -> Result<Vec<f64>> {
    let order: Vec<usize> = (0..terms.len()).collect();
    recombine_in_order(terms, n_outputs, &order)
}

/// Contract units one at a time in `order`, keeping a table over the labels
/// of cuts with only one end absorbed so far. A cut is summed out, with its
/// factor 1/2, as soon as its second end arrives.
pub fn recombine_in_order(terms: &[CutTerms], n_outputs: usize, order: &[usize]) -> Result<Vec<f64>> {
    check_structure(terms, n_outputs)?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..terms.len()).collect::<Vec<_>>() {
        return Err(Error::Structural("order is not a permutation of the units".into()));
    }

    let mut open: Vec<CutPoint> = Vec::new();
    let mut bits: Vec<usize> = Vec::new();
    let mut table: Vec<Vec<f64>> = vec![vec![1.0]];
    for &ui in order {
        let t = &terms[ui];
        let unit_cuts: Vec<CutPoint> = t.cuts.iter().map(|c| c.0).collect();
        let closing: Vec<CutPoint> = unit_cuts.iter().copied().filter(|c| open.contains(c)).collect();
        let mut next_open: Vec<CutPoint> = open.iter().copied().filter(|c| !closing.contains(c)).collect();
        next_open.extend(unit_cuts.iter().copied().filter(|c| !closing.contains(c)));

        let nb_old = bits.len();
        let scale = 0.5f64.powi(closing.len() as i32);
        let n_close = 1usize << (2 * closing.len());
        let width = 1usize << (nb_old + t.n_bits);
        let label_of = |cut: &CutPoint, ln: usize, lc: usize| -> usize {
            match closing.iter().position(|c| c == cut) {
                Some(k) => digit(lc, k),
                None => digit(ln, next_open.iter().position(|c| c == cut).unwrap()),
            }
        };
        let next_table = par::map_range(1usize << (2 * next_open.len()), |ln| {
            let mut acc = vec![0.0; width];
            for lc in 0..n_close {
                let old = open.iter().enumerate().fold(0, |a, (k, c)| a | (label_of(c, ln, lc) << (2 * k)));
                let mine = unit_cuts
                    .iter()
                    .enumerate()
                    .fold(0, |a, (k, c)| a | (label_of(c, ln, lc) << (2 * k)));
                let (x, y) = (&table[old], &t.terms[mine]);
                for (b, &yb) in y.iter().enumerate() {
                    if yb == 0.0 {
                        continue;
                    }
                    let row = &mut acc[b << nb_old..(b + 1) << nb_old];
                    for (r, &xa) in row.iter_mut().zip(x) {
                        *r += scale * xa * yb;
                    }
                }
            }
            acc
        });
        table = next_table;
        open = next_open;
        bits.extend(&t.output_map);
    }
    debug_assert!(open.is_empty());
    let joint = &table[0];
    let mut out = vec![0.0; 1 << n_outputs];
    for (i, &v) in joint.iter().enumerate() {
        let g = bits
            .iter()
            .enumerate()
            .fold(0usize, |a, (k, &b)| a | (((i >> k) & 1) << b));
        out[g] = v;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub raw: Vec<f64>,
    pub distribution: Distribution,
    pub negativity_mass: f64,
}

/// Clamp negative entries to zero and renormalize. Returns the
/// distribution and the total mass that was clamped away.
pub fn postprocess(raw: &[f64]) -> Result<(Distribution, f64)> {
    if raw.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParams("reconstructed vector has non-finite entries".into()));
    }
    let n_bits = raw.len().trailing_zeros() as usize;
    if raw.len() != 1 << n_bits {
        return Err(Error::Structural(format!("length {} is not a power of two", raw.len())));
    }
    // an empty float sum is -0.0; report it as plain zero
    let negativity: f64 = raw.iter().filter(|&&x| x < 0.0).map(|x| -x).sum::<f64>() + 0.0;
    let positive: f64 = raw.iter().filter(|&&x| x > 0.0).sum();
    if positive <= 0.0 {
        return Err(Error::AllZero);
    }
    let probs = raw.iter().map(|&x| x.max(0.0) / positive).collect();
    Ok((Distribution::new(n_bits, probs)?, negativity))
}

pub fn reconstruct(terms: &[CutTerms], n_outputs: usize) -> Result<ReconstructionResult> {
    let raw = recombine(terms, n_outputs)?;
    let (distribution, negativity_mass) = postprocess(&raw)?;
    Ok(ReconstructionResult {
        raw,
        distribution,
        negativity_mass,
    })
}
