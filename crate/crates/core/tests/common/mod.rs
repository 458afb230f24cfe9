#![allow(dead_code)]

use harmonic_channels::group::{FiniteGroup, GroupDescriptor, ProbabilityMeasure};
use harmonic_channels::linalg::{c, cr, CMat, CVec};
use harmonic_channels::rep::{irrep_catalog, pdf_from_rep, regular_reps, PositiveDefiniteFunction, UnitaryRep};
use harmonic_channels::schur::random_unit_vector;
use rand::Rng;

pub fn grp(alias: &str) -> FiniteGroup {
    FiniteGroup::build(&GroupDescriptor::from_alias(alias).unwrap()).unwrap()
}

pub fn s3_2d() -> (FiniteGroup, UnitaryRep) {
    let g = grp("s3");
    let pi = irrep_catalog(&g).unwrap().into_iter().find(|r| r.dim() == 2).unwrap();
    (g, pi)
}

pub fn extreme_xi() -> CVec {
    let s = 10f64.sqrt();
    CVec::from_vec(vec![c(0.0, 1.0 / s), cr(3.0 / s)])
}

pub fn planar_xi() -> CVec {
    let s = 2f64.sqrt();
    CVec::from_vec(vec![cr(1.0 / s), c(0.0, 1.0 / s)])
}

/// Random weights; with `sparse` some entries are zeroed (the identity
/// always keeps mass so the measure is never empty).
pub fn random_measure<R: Rng>(rng: &mut R, g: &FiniteGroup, sparse: bool) -> ProbabilityMeasure {
    let mut w: Vec<f64> = (0..g.order()).map(|_| rng.random::<f64>()).collect();
    if sparse {
        for (i, x) in w.iter_mut().enumerate() {
            if i > 0 && rng.random_bool(0.5) {
                *x = 0.0;
            }
        }
        w[0] += 0.1;
    }
    ProbabilityMeasure::on(g, w.iter().map(|x| x / w.iter().sum::<f64>()).collect()).unwrap()
}

/// φ(s) = ⟨λ(s)ξ, ξ⟩ for a random unit ξ in the left regular representation.
pub fn random_pdf<R: Rng>(rng: &mut R, g: &FiniteGroup) -> PositiveDefiniteFunction {
    let (left, _) = regular_reps(g);
    let xi = random_unit_vector(rng, g.order());
    pdf_from_rep(&left, &xi).unwrap()
}

pub fn direct_sum(g: &FiniteGroup, parts: &[&UnitaryRep]) -> UnitaryRep {
    let dim: usize = parts.iter().map(|p| p.dim()).sum();
    let mats = g
        .elements()
        .map(|s| {
            let mut m = CMat::zeros(dim, dim);
            let mut off = 0;
            for p in parts {
                m.view_mut((off, off), (p.dim(), p.dim())).copy_from(p.matrix(s));
                off += p.dim();
            }
            m
        })
        .collect();
    UnitaryRep::new(g, mats, "sum").unwrap()
}

/// Random direct sum of 1–3 catalog irreps (with repetition) of total
/// dimension at least two.
pub fn random_rep<R: Rng>(rng: &mut R, g: &FiniteGroup) -> UnitaryRep {
    let cat = irrep_catalog(g).unwrap();
    loop {
        let k = rng.random_range(1..=3);
        let picks: Vec<&UnitaryRep> = (0..k).map(|_| &cat[rng.random_range(0..cat.len())]).collect();
        if picks.iter().map(|p| p.dim()).sum::<usize>() >= 2 {
            return direct_sum(g, &picks);
        }
    }
}

/// Every subgroup, found as the subgroups generated by at most two elements.
pub fn small_subgroups(g: &FiniteGroup) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for a in g.elements() {
        for b in g.elements() {
            let mut h = g.subgroup_generated(&[a, b]).unwrap();
            h.sort_unstable();
            if !out.contains(&h) {
                out.push(h);
            }
        }
    }
    out
}
