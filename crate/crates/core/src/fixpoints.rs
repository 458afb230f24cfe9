//! Fixed-point spaces of channels, the algebras they form and their
//! block decompositions into amplified matrix algebras.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{multiplication_operator, theta, theta_hat, QuantumChannel};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, ProbabilityMeasure};
use crate::linalg::{
    c, cr, hermitian_eigen, identity, matrix_unit, null_space, unvec, vec_of, CMat, OrthoBasis, C64,
};
use crate::rep::{irrep_catalog, left_regular, PositiveDefiniteFunction};

pub const FIX_TOL: f64 = 1e-9;
const MAX_GENERATION_ROUNDS: usize = 20;

/// Subspace of d×d matrices with a trace-orthonormal basis.
#[derive(Debug, Clone)]
pub struct OperatorSubspace {
    ambient_dim: usize,
    basis: Vec<CMat>,
}

impl OperatorSubspace {
    /// Orthonormalizes `spanning` (dependent elements are dropped).
    pub fn span(ambient_dim: usize, spanning: &[CMat]) -> Self {
        let mut ob = OrthoBasis::new();
        for m in spanning {
            ob.try_add(&vec_of(m), FIX_TOL);
        }
        Self::from_ortho(ambient_dim, ob)
    }

    fn from_ortho(ambient_dim: usize, ob: OrthoBasis) -> Self {
        let basis = ob.vectors.iter().map(|v| unvec(v, ambient_dim, ambient_dim)).collect();
        Self { ambient_dim, basis }
    }

    fn ortho(&self) -> OrthoBasis {
        OrthoBasis { vectors: self.basis.iter().map(vec_of).collect() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    /// Frobenius norm of the component of `m` orthogonal to the subspace.
    pub fn residual(&self, m: &CMat) -> f64 {
        self.ortho().residual(&vec_of(m)).norm()
    }

    pub fn contains(&self, m: &CMat, tol: f64) -> bool {
        self.residual(m) <= tol * m.norm().max(1.0)
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            out += b * crate::linalg::hs_inner(b, m);
        }
        out
    }

    /// Largest Gram-matrix deviation from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((crate::linalg::hs_inner(a, b) - cr(want)).norm());
            }
        }
        worst
    }

    /// Same subspace: equal dimension and mutual containment.
    pub fn coincides(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.basis.iter().all(|b| other.residual(b) <= tol)
            && other.basis.iter().all(|b| self.residual(b) <= tol)
    }
}

/// Kernel of Φ† − id, read off the superoperator matrix.
pub fn fixed_point_space(phi: &QuantumChannel) -> Result<OperatorSubspace> {
    let d = phi.dim_in();
    if phi.dim_out() != d {
        return Err(Error::DimensionMismatch(format!("channel {}→{} is not square", d, phi.dim_out())));
    }
    let heis = phi.superoperator().adjoint() - identity(d * d);
    let kernel = null_space(&heis, FIX_TOL);
    let mut ob = OrthoBasis::new();
    for v in &kernel {
        ob.try_add(v, FIX_TOL);
    }
    Ok(OperatorSubspace::from_ortho(d, ob))
}

/// Basis of the solutions of μ∗f = f, where μ∗f(s) = Σ_t μ(t) f(st). The
/// basis is the set of indicators of the left cosets of the subgroup
/// generated by the support of μ.
pub fn harmonic_functions(mu: &ProbabilityMeasure, g: &FiniteGroup) -> Result<Vec<Vec<f64>>> {
    if mu.len() != g.order() {
        return Err(Error::DimensionMismatch(format!("measure of length {} on a group of order {}", mu.len(), g.order())));
    }
    let h = g.subgroup_generated(&mu.support())?;
    let cosets = g.left_cosets(&h)?;
    Ok(cosets
        .iter()
        .map(|coset| {
            let mut f = vec![0.0; g.order()];
            for &s in coset {
                f[s] = 1.0;
            }
            f
        })
        .collect())
}

/// Residual of μ∗f − f in the sup norm.
pub fn harmonic_residual(mu: &ProbabilityMeasure, g: &FiniteGroup, f: &[f64]) -> f64 {
    g.elements()
        .map(|s| {
            let avg: f64 = g.elements().map(|t| mu.weights()[t] * f[g.mul(s, t)]).sum();
            (avg - f[s]).abs()
        })
        .fold(0.0, f64::max)
}

/// Unital *-algebra generated by `gens`: repeated right multiplication of the
/// current span by the generators and their adjoints until the dimension
/// stops growing.
pub fn generate_algebra(d: usize, gens: &[CMat]) -> OperatorSubspace {
    let mut all: Vec<CMat> = Vec::with_capacity(2 * gens.len());
    for g in gens {
        all.push(g.clone());
        all.push(g.adjoint());
    }
    let letters = OperatorSubspace::span(d, &all).basis;
    let mut ob = OrthoBasis::new();
    ob.try_add(&vec_of(&identity(d)), FIX_TOL);
    for l in &letters {
        ob.try_add(&vec_of(l), FIX_TOL);
    }
    // each round at least doubles the word length reached
    for _ in 0..MAX_GENERATION_ROUNDS.max(d * d) {
        let before = ob.dim();
        let current: Vec<CMat> = ob.vectors.iter().map(|v| unvec(v, d, d)).collect();
        for a in &current {
            for l in &letters {
                ob.try_add(&vec_of(&(a * l)), FIX_TOL);
            }
        }
        if ob.dim() == before || ob.dim() == d * d {
            break;
        }
    }
    OperatorSubspace::from_ortho(d, ob)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixComparison {
    pub holds: bool,
    pub lhs_dim: usize,
    pub rhs_dim: usize,
}

/// Fix(Θ(μ)) against the algebra generated by the harmonic multiplication
/// operators and the left translations.
pub fn verify_fix_theta(mu: &ProbabilityMeasure, g: &FiniteGroup) -> Result<FixComparison> {
    let lhs = fixed_point_space(&theta(mu, g)?)?;
    let mut gens: Vec<CMat> = harmonic_functions(mu, g)?
        .iter()
        .map(|f| multiplication_operator(&f.iter().map(|&x| cr(x)).collect::<Vec<_>>()))
        .collect();
    gens.extend(g.elements().map(|s| left_regular(g, s)));
    let rhs = generate_algebra(g.order(), &gens);
    Ok(FixComparison { holds: lhs.coincides(&rhs, FIX_TOL), lhs_dim: lhs.dim(), rhs_dim: rhs.dim() })
}

/// Fix(Θ̂(φ)) against the algebra generated by l_s (s ∈ G_φ) and the diagonal.
pub fn verify_fix_theta_hat(phi: &PositiveDefiniteFunction, g: &FiniteGroup) -> Result<FixComparison> {
    let lhs = fixed_point_space(&theta_hat(phi, g)?)?;
    let n = g.order();
    let mut gens: Vec<CMat> = (0..n).map(|s| matrix_unit(n, s, s)).collect();
    gens.extend(phi.unit_set().into_iter().map(|s| left_regular(g, s)));
    let rhs = generate_algebra(n, &gens);
    Ok(FixComparison { holds: lhs.coincides(&rhs, FIX_TOL), lhs_dim: lhs.dim(), rhs_dim: rhs.dim() })
}

/// Failure of an algebra axiom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AlgebraWitness {
    MissingIdentity { residual: f64 },
    NotSelfAdjoint { index: usize, residual: f64 },
    NotClosed { left: usize, right: usize, residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgebraReport {
    pub verdict: bool,
    pub witness: Option<AlgebraWitness>,
}

/// Unital *-algebra test on an operator subspace.
pub fn is_algebra(s: &OperatorSubspace) -> AlgebraReport {
    let d = s.ambient_dim();
    let ob = s.ortho();
    let res = |m: &CMat| ob.residual(&vec_of(m)).norm();
    let id_res = res(&identity(d));
    if id_res > FIX_TOL * (d as f64).sqrt() {
        return AlgebraReport { verdict: false, witness: Some(AlgebraWitness::MissingIdentity { residual: id_res }) };
    }
    for (i, b) in s.basis().iter().enumerate() {
        let r = res(&b.adjoint());
        if r > FIX_TOL {
            return AlgebraReport { verdict: false, witness: Some(AlgebraWitness::NotSelfAdjoint { index: i, residual: r }) };
        }
    }
    let mut worst: Option<(usize, usize, f64)> = None;
    for (i, a) in s.basis().iter().enumerate() {
        for (j, b) in s.basis().iter().enumerate() {
            let r = res(&(a * b));
            if r > FIX_TOL && worst.is_none_or(|w| r > w.2) {
                worst = Some((i, j, r));
            }
        }
    }
    match worst {
        None => AlgebraReport { verdict: true, witness: None },
        Some((left, right, residual)) => AlgebraReport {
            verdict: false,
            witness: Some(AlgebraWitness::NotClosed { left, right, residual }),
        },
    }
}

/// ⊕_k M_{n_k} ⊗ I_{m_k} up to the unitary `change_of_basis`.
#[derive(Debug, Clone)]
pub struct AlgebraDecomposition {
    pub blocks: Vec<(usize, usize)>,
    /// Columns are the adapted basis: block after block, index i·m + j
    /// inside a block.
    pub change_of_basis: CMat,
    pub seed: u64,
}

impl AlgebraDecomposition {
    /// Largest entry of U† a U outside the allowed block pattern, or
    /// deviation from the form x ⊗ I_m inside a block.
    pub fn block_defect(&self, a: &CMat) -> f64 {
        let u = &self.change_of_basis;
        let t = u.adjoint() * a * u;
        let n = t.nrows();
        let mut worst: f64 = 0.0;
        let mut offset = 0;
        let mut owner = vec![0usize; n];
        for (k, &(nk, mk)) in self.blocks.iter().enumerate() {
            for i in 0..nk * mk {
                owner[offset + i] = k;
            }
            offset += nk * mk;
        }
        for r in 0..n {
            for cidx in 0..n {
                if owner[r] != owner[cidx] {
                    worst = worst.max(t[(r, cidx)].norm());
                }
            }
        }
        let mut offset = 0;
        for &(nk, mk) in &self.blocks {
            for i in 0..nk {
                for i2 in 0..nk {
                    let base = t[(offset + i * mk, offset + i2 * mk)];
                    for j in 0..mk {
                        for j2 in 0..mk {
                            let v = t[(offset + i * mk + j, offset + i2 * mk + j2)];
                            let want = if j == j2 { base } else { C64::new(0.0, 0.0) };
                            worst = worst.max((v - want).norm());
                        }
                    }
                }
            }
            offset += nk * mk;
        }
        worst
    }
}

fn random_hermitian_in(basis: &[CMat], rng: &mut ChaCha8Rng) -> CMat {
    let d = basis.first().map_or(0, |b| b.nrows());
    let mut z = CMat::zeros(d, d);
    for b in basis {
        z += b * c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    (&z + z.adjoint()) * cr(0.5)
}

/// Groups descending eigenvalues into clusters; returns the orthonormal
/// eigenvectors of each cluster as matrix columns.
fn eigen_clusters(h: &CMat, tol: f64) -> Vec<CMat> {
    let (vals, vecs) = hermitian_eigen(h);
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match out.last_mut() {
            Some(cl) if (vals[cl[0]] - v).abs() <= tol => cl.push(i),
            _ => out.push(vec![i]),
        }
    }
    out.iter()
        .map(|cl| {
            let mut m = CMat::zeros(h.nrows(), cl.len());
            for (k, &i) in cl.iter().enumerate() {
                m.set_column(k, &vecs.column(i));
            }
            m
        })
        .collect()
}

fn center(a: &OperatorSubspace) -> Vec<CMat> {
    let k = a.dim();
    let d = a.ambient_dim();
    // coefficients c with [Σ c_i a_i, a_j] = 0 for every j
    let mut sys = CMat::zeros(k * d * d, k);
    for (i, ai) in a.basis().iter().enumerate() {
        for (j, aj) in a.basis().iter().enumerate() {
            let comm = ai * aj - aj * ai;
            sys.view_mut((j * d * d, i), (d * d, 1)).copy_from(&vec_of(&comm));
        }
    }
    null_space(&sys, FIX_TOL)
        .iter()
        .map(|coef| {
            let mut z = CMat::zeros(d, d);
            for (t, b) in a.basis().iter().enumerate() {
                z += b * coef[t];
            }
            z
        })
        .collect()
}

fn try_decompose(a: &OperatorSubspace, seed: u64) -> Option<AlgebraDecomposition> {
    let d = a.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = center(a);
    let h = random_hermitian_in(&z, &mut rng);
    let mut blocks: Vec<((usize, usize), CMat)> = Vec::new();
    for cols in eigen_clusters(&h, 1e-7) {
        let p = &cols * cols.adjoint();
        let rank = cols.ncols();
        let compressed: Vec<CMat> = a.basis().iter().map(|b| b * &p).collect();
        let ak = OperatorSubspace::span(d, &compressed);
        let nk = (ak.dim() as f64).sqrt().round() as usize;
        if nk == 0 || nk * nk != ak.dim() || rank % nk != 0 {
            return None;
        }
        let mk = rank / nk;
        // minimal projections from a generic element of the block
        let hk = random_hermitian_in(ak.basis(), &mut rng);
        let restricted = cols.adjoint() * &hk * &cols;
        let eig = eigen_clusters(&restricted, 1e-7);
        if eig.len() != nk || eig.iter().any(|e| e.ncols() != mk) {
            return None;
        }
        let spaces: Vec<CMat> = eig.iter().map(|e| &cols * e).collect();
        let q1 = &spaces[0];
        let b = random_hermitian_in(ak.basis(), &mut rng) + random_hermitian_in(ak.basis(), &mut rng) * c(0.0, 1.0);
        let mut adapted = CMat::zeros(d, rank);
        for (i, qi) in spaces.iter().enumerate() {
            // e_{i1} f_j = Q_i b f_j, normalized
            let block = if i == 0 { q1.clone() } else { qi * qi.adjoint() * &b * q1 };
            let scale = if i == 0 { 1.0 } else { (block.adjoint() * &block)[(0, 0)].re.sqrt() };
            if scale < 1e-8 {
                return None;
            }
            let block = block / cr(scale);
            for j in 0..mk {
                adapted.set_column(i * mk + j, &block.column(j));
            }
        }
        blocks.push(((nk, mk), adapted));
    }
    blocks.sort_by_key(|b| std::cmp::Reverse(b.0));
    let total: usize = blocks.iter().map(|(b, _)| b.0 * b.1).sum();
    if total != d {
        return None;
    }
    let mut u = CMat::zeros(d, d);
    let mut off = 0;
    for (_, cols) in &blocks {
        u.view_mut((0, off), (d, cols.ncols())).copy_from(cols);
        off += cols.ncols();
    }
    let dec = AlgebraDecomposition { blocks: blocks.into_iter().map(|(b, _)| b).collect(), change_of_basis: u, seed };
    let unitary_defect = crate::linalg::max_abs_diff(&(dec.change_of_basis.adjoint() * &dec.change_of_basis), &identity(d));
    if unitary_defect > 1e-8 || a.basis().iter().any(|b| dec.block_defect(b) > 1e-8) {
        return None;
    }
    Some(dec)
}

/// Block decomposition of a unital *-algebra; collisions in the random
/// central element are retried with the next seed.
pub fn structure_decomposition(a: &OperatorSubspace, seed: u64) -> Result<AlgebraDecomposition> {
    let check = is_algebra(a);
    if !check.verdict {
        return Err(Error::NotAnAlgebra(format!("{:?}", check.witness)));
    }
    (0..16)
        .find_map(|k| try_decompose(a, seed.wrapping_add(k)))
        .ok_or_else(|| Error::NumericalFailure("structure decomposition did not stabilize".into()))
}

/// Coefficient function π_ij(s) = ⟨π(s)e_j, e_i⟩.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientFunction {
    pub irrep: String,
    pub i: usize,
    pub j: usize,
    pub values: Vec<[f64; 2]>,
}

pub fn coefficient_functions(g: &FiniteGroup) -> Result<Vec<CoefficientFunction>> {
    let mut out = Vec::new();
    for pi in irrep_catalog(g)? {
        for i in 0..pi.dim() {
            for j in 0..pi.dim() {
                let values = g.elements().map(|s| {
                    let z = pi.matrix(s)[(i, j)];
                    [z.re, z.im]
                });
                out.push(CoefficientFunction { irrep: pi.label.clone(), i, j, values: values.collect() });
            }
        }
    }
    Ok(out)
}

/// Peter–Weyl prediction for an adapted measure: one (d_π, d_π) block per
/// irrep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeterWeyl {
    pub predicted_blocks: Vec<(usize, usize)>,
    pub matches: bool,
    pub coefficient_functions: Vec<CoefficientFunction>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiselessReport {
    pub blocks: Vec<(usize, usize)>,
    pub noiseless: Vec<usize>,
    pub unitary: Vec<Vec<[f64; 2]>>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peter_weyl: Option<PeterWeyl>,
}

pub fn noiseless_subsystems(phi: &QuantumChannel, seed: u64) -> Result<NoiselessReport> {
    let fix = fixed_point_space(phi)?;
    let check = is_algebra(&fix);
    if !check.verdict {
        return Err(Error::FixedPointsNotAlgebra(format!("{:?}", check.witness)));
    }
    let dec = structure_decomposition(&fix, seed)?;
    let u = &dec.change_of_basis;
    Ok(NoiselessReport {
        noiseless: dec.blocks.iter().enumerate().filter(|(_, b)| b.0 > 1).map(|(k, _)| k).collect(),
        unitary: (0..u.nrows()).map(|r| (0..u.ncols()).map(|cidx| [u[(r, cidx)].re, u[(r, cidx)].im]).collect()).collect(),
        blocks: dec.blocks,
        seed: dec.seed,
        peter_weyl: None,
    })
}

/// Noiseless subsystems of Θ(μ), cross-referenced with the irrep dimensions
/// when the support of μ generates G.
pub fn noiseless_subsystems_theta(mu: &ProbabilityMeasure, g: &FiniteGroup, seed: u64) -> Result<NoiselessReport> {
    let mut report = noiseless_subsystems(&theta(mu, g)?, seed)?;
    let adapted = g.subgroup_generated(&mu.support())?.len() == g.order();
    if adapted {
        if let Ok(irreps) = irrep_catalog(g) {
            let mut predicted: Vec<(usize, usize)> = irreps.iter().map(|p| (p.dim(), p.dim())).collect();
            predicted.sort_by(|x, y| y.cmp(x));
            report.peter_weyl = Some(PeterWeyl {
                matches: predicted == report.blocks,
                predicted_blocks: predicted,
                coefficient_functions: coefficient_functions(g)?,
            });
        }
    }
    Ok(report)
}

/// Fix(Θ(μ)) ⊆ Fix(Θ(μⁿ)).
pub fn fix_contained_in_power(mu: &ProbabilityMeasure, g: &FiniteGroup, n: usize) -> Result<bool> {
    let base = fixed_point_space(&theta(mu, g)?)?;
    let pow = fixed_point_space(&theta(&mu.power(n, g), g)?)?;
    Ok(base.basis().iter().all(|b| pow.residual(b) <= FIX_TOL))
}

/// Largest residual ‖Φ†(x) − x‖ over `elements`.
pub fn fixed_residual(phi: &QuantumChannel, elements: &[CMat]) -> f64 {
    elements.iter().map(|x| (phi.apply_adjoint(x) - x).norm()).fold(0.0, f64::max)
}
