//! Exhaustive structural checks over the built-in group catalog.

mod common;

use common::*;
use harmonic_channels::channel::{
    diagonal_group_algebra_intersection_dim, multiplication_operator, theta, theta_hat,
};
use harmonic_channels::fixpoints::{
    fixed_point_space, fixed_residual, noiseless_subsystems_theta, structure_decomposition,
};
use harmonic_channels::group::{FiniteGroup, ProbabilityMeasure};
use harmonic_channels::linalg::{cr, identity, matrix_unit, max_abs_diff, CMat, C64};
use harmonic_channels::rep::{gns, irrep_catalog, left_regular, pdf_from_rep, PositiveDefiniteFunction};
use harmonic_channels::schur::correlation_matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CATALOG: [&str; 11] = ["z2", "z5", "z12", "z2^3", "z2xz4", "s3", "s4", "d4", "d5", "d6", "d4-semidirect"];

#[test]
fn group_axioms_hold_for_catalog_and_large_orders() {
    for alias in CATALOG.iter().chain(&["z64", "d32", "z2^6", "z8xz8"]) {
        let g = grp(alias);
        assert!(g.check_axioms().is_ok(), "{alias}");
    }
}

#[test]
fn convolution_is_associative_with_unit() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for alias in ["z6", "s3", "d4-semidirect", "d6", "z2xz2"] {
        let g = grp(alias);
        let delta = ProbabilityMeasure::delta(&g, g.identity());
        for _ in 0..5 {
            let a = random_measure(&mut rng, &g, false);
            let b = random_measure(&mut rng, &g, true);
            let c = random_measure(&mut rng, &g, false);
            let left = a.convolve(&b, &g).convolve(&c, &g);
            let right = a.convolve(&b.convolve(&c, &g), &g);
            assert!(left.max_abs_diff(&right) < 1e-15, "{alias}");
            assert!(a.convolve(&delta, &g).max_abs_diff(&a) < 1e-15);
            assert!(delta.convolve(&a, &g).max_abs_diff(&a) < 1e-15);
        }
    }
}

#[test]
fn generated_subgroup_is_whole_group_iff_single_coset() {
    for alias in ["z6", "s3", "d4-semidirect"] {
        let g = grp(alias);
        for a in g.elements() {
            for b in g.elements() {
                let h = g.subgroup_generated(&[a, b]).unwrap();
                let cosets = g.left_cosets(&h).unwrap();
                assert_eq!(h.len() == g.order(), cosets.len() == 1);
            }
        }
    }
}

#[test]
fn abelian_characters_are_orthonormal() {
    for alias in ["z2", "z7", "z12", "z2^3", "z2xz4", "z3xz3"] {
        let g = grp(alias);
        let chars = g.characters().unwrap();
        assert_eq!(chars.len(), g.order());
        for (i, a) in chars.iter().enumerate() {
            assert!(a.is_homomorphism(&g, 1e-12));
            for (j, b) in chars.iter().enumerate() {
                let ip: C64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y.conj()).sum::<C64>() / cr(g.order() as f64);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - cr(want)).norm() < 1e-12, "{alias} {i} {j}");
            }
        }
    }
}

#[test]
fn catalog_irreps_are_homomorphisms_with_schur_orthogonality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for alias in CATALOG {
        let g = grp(alias);
        let irreps = irrep_catalog(&g).unwrap();
        assert_eq!(irreps.iter().map(|p| p.dim() * p.dim()).sum::<usize>(), g.order(), "{alias}");
        for pi in &irreps {
            assert!(pi.homomorphism_residual(&g) <= 1e-10, "{alias} {}", pi.label);
            let d = pi.dim();
            let rho = CMat::from_fn(d, d, |_, _| harmonic_channels::linalg::c(rng.random(), rng.random()));
            let mut avg = CMat::zeros(d, d);
            for s in g.elements() {
                avg += pi.matrix(s).adjoint() * &rho * pi.matrix(s);
            }
            let want = identity(d) * (rho.trace() * cr(g.order() as f64 / d as f64));
            assert!(max_abs_diff(&avg, &want) <= 1e-10, "{alias} {}", pi.label);
        }
    }
}

#[test]
fn gns_round_trip_and_unit_set_is_subgroup() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for alias in ["z4", "s3", "d4-semidirect", "d5"] {
        let g = grp(alias);
        let cat = irrep_catalog(&g).unwrap();
        for k in 0..6 {
            let phi = if k % 2 == 0 {
                random_pdf(&mut rng, &g)
            } else {
                let pi = &cat[rng.random_range(0..cat.len())];
                let psi = pdf_from_rep(pi, &harmonic_channels::schur::random_unit_vector(&mut rng, pi.dim())).unwrap();
                // G_φ = H for a mixture of 1_H and the constant function
                let h = g.subgroup_generated(&[rng.random_range(0..g.order())]).unwrap();
                let ind = PositiveDefiniteFunction::subgroup_indicator(&g, &h).unwrap();
                let one = PositiveDefiniteFunction::constant_one(&g);
                let phi = PositiveDefiniteFunction::mixture(&[(0.5, &ind), (0.5, &one)]);
                assert_eq!(phi.unit_set(), h);
                PositiveDefiniteFunction::mixture(&[(0.7, &phi), (0.3, &psi)])
            };
            let res = gns(&phi, &g).unwrap();
            let back = pdf_from_rep(&res.rep, &res.xi).unwrap();
            for (a, b) in back.values().iter().zip(phi.values()) {
                assert!((a - b).norm() <= 1e-10, "{alias}");
            }
            let unit = phi.unit_set();
            for &a in &unit {
                for &b in &unit {
                    assert!(unit.contains(&g.mul(a, b)) && unit.contains(&g.inv(a)));
                }
            }
        }
    }
}

#[test]
fn module_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for alias in ["z5", "s3", "d4-semidirect"] {
        let g = grp(alias);
        let n = g.order();
        let phi = random_pdf(&mut rng, &g);
        let tc = theta_hat(&phi, &g).unwrap();
        for s in g.elements() {
            let l = left_regular(&g, s);
            assert!(max_abs_diff(&tc.apply(&l), &(&l * phi.values()[s])) <= 1e-10);
        }
        let mu = random_measure(&mut rng, &g, true);
        let th = theta(&mu, &g).unwrap();
        for u in g.elements() {
            let f: Vec<f64> = (0..n).map(|v| (v == u) as u8 as f64).collect();
            let conv: Vec<C64> = g
                .elements()
                .map(|s| cr(g.elements().map(|t| f[g.mul(s, t)] * mu.weights()[t]).sum()))
                .collect();
            let mf = multiplication_operator(&f.iter().map(|&x| cr(x)).collect::<Vec<_>>());
            assert!(max_abs_diff(&th.apply(&mf), &multiplication_operator(&conv)) <= 1e-12);
        }
        let a = correlation_matrix(&phi, &g).unwrap();
        let x = CMat::from_fn(n, n, |_, _| harmonic_channels::linalg::c(rng.random(), rng.random()));
        assert!(max_abs_diff(&tc.apply(&x), &a.matrix().component_mul(&x)) <= 1e-12);
        let res = gns(&phi, &g).unwrap();
        let gram = CMat::from_fn(n, n, |s, t| res.translate(s).dotc(&res.translate(t)));
        assert!(max_abs_diff(&gram, a.matrix()) <= 1e-10);
    }
}

#[test]
fn diagonal_and_group_algebra_meet_in_scalars() {
    for alias in ["z2", "z6", "s3", "d4-semidirect", "z2^3"] {
        assert_eq!(diagonal_group_algebra_intersection_dim(&grp(alias)), 1, "{alias}");
    }
}

#[test]
fn fixed_points_contain_group_algebra_and_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for alias in ["z6", "s3", "d4-semidirect"] {
        let g = grp(alias);
        let n = g.order();
        let ls: Vec<CMat> = g.elements().map(|s| left_regular(&g, s)).collect();
        let diag: Vec<CMat> = (0..n).map(|s| matrix_unit(n, s, s)).collect();
        for _ in 0..4 {
            let mu = random_measure(&mut rng, &g, true);
            assert!(fixed_residual(&theta(&mu, &g).unwrap(), &ls) <= 1e-10);
            let phi = random_pdf(&mut rng, &g);
            assert!(fixed_residual(&theta_hat(&phi, &g).unwrap(), &diag) <= 1e-10);
        }
    }
}

fn dims_multiset(g: &FiniteGroup) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> = irrep_catalog(g).unwrap().iter().map(|p| (p.dim(), p.dim())).collect();
    v.sort_by(|a, b| b.cmp(a));
    v
}

#[test]
fn adapted_noiseless_blocks_match_irrep_dimensions() {
    for alias in ["z5", "z2^3", "s3", "d4", "d5", "d6", "d4-semidirect"] {
        let g = grp(alias);
        let r = noiseless_subsystems_theta(&ProbabilityMeasure::haar(&g), &g, 11).unwrap();
        assert_eq!(r.blocks, dims_multiset(&g), "{alias}");
        let pw = r.peter_weyl.expect("adapted measure");
        assert!(pw.matches);
        let expected_noiseless = r.blocks.iter().filter(|b| b.0 > 1).count();
        assert_eq!(r.noiseless.len(), expected_noiseless);
    }
}

#[test]
fn decomposition_blocks_do_not_depend_on_seed() {
    let g = grp("d4-semidirect");
    let mu = ProbabilityMeasure::new(vec![0.2, 0.0, 0.3, 0.0, 0.5, 0.0, 0.0, 0.0]).unwrap();
    let fix = fixed_point_space(&theta(&mu, &g).unwrap()).unwrap();
    let first = structure_decomposition(&fix, 0).unwrap();
    for seed in 1..10 {
        let d = structure_decomposition(&fix, seed).unwrap();
        assert_eq!(d.blocks, first.blocks);
        for b in fix.basis() {
            assert!(d.block_defect(b) <= 1e-9);
        }
    }
}
