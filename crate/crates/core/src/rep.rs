//! Unitary representations, positive definite functions, the GNS
//! factorization and the abelian Fourier transform.
//!
//! The right regular representation is `r_s δ_t = δ_{ts⁻¹}` and the left one
//! is `l_s δ_t = δ_{st}`. No modular factor appears since finite groups are
//! unimodular.

use crate::error::{Error, Result};
use crate::group::{root_of_unity, symmetric_elements, Character, Family, FiniteGroup, GroupDescriptor, ProbabilityMeasure};
use crate::linalg::{c, cr, diag, hermitian_eigen, identity, kron, spectral_norm, CMat, CVec, C64, RANK_TOL, TOL};

/// A homomorphism from a finite group into d×d unitaries.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryRep {
    pub label: String,
    dim: usize,
    matrices: Vec<CMat>,
}

impl UnitaryRep {
    /// Validates unitarity and the homomorphism property against `g`.
    pub fn new(g: &FiniteGroup, matrices: Vec<CMat>, label: impl Into<String>) -> Result<Self> {
        let rep = Self::unchecked(matrices, label);
        rep.check(g, TOL)?;
        Ok(rep)
    }

    pub fn unchecked(matrices: Vec<CMat>, label: impl Into<String>) -> Self {
        let dim = matrices.first().map(|m| m.nrows()).unwrap_or(0);
        Self { label: label.into(), dim, matrices }
    }

    pub fn from_character(ch: &Character, label: impl Into<String>) -> Self {
        let matrices = ch.values.iter().map(|&v| CMat::from_element(1, 1, v)).collect();
        Self::unchecked(matrices, label)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, s: usize) -> &CMat {
        &self.matrices[s]
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    /// Character s ↦ tr π(s).
    pub fn character(&self) -> Vec<C64> {
        self.matrices.iter().map(|m| m.trace()).collect()
    }

    /// Largest homomorphism defect max ‖π(s)π(t) − π(st)‖.
    pub fn homomorphism_residual(&self, g: &FiniteGroup) -> f64 {
        let mut worst: f64 = 0.0;
        for s in g.elements() {
            for t in g.elements() {
                let d = &self.matrices[s] * &self.matrices[t] - &self.matrices[g.mul(s, t)];
                worst = worst.max(spectral_norm(&d));
            }
        }
        worst
    }

    pub fn unitarity_residual(&self) -> f64 {
        let id = identity(self.dim);
        self.matrices
            .iter()
            .map(|u| spectral_norm(&(u * u.adjoint() - &id)))
            .fold(0.0, f64::max)
    }

    pub fn check(&self, g: &FiniteGroup, tol: f64) -> Result<()> {
        if self.matrices.len() != g.order() {
            return Err(Error::InvalidRep(format!(
                "{}: {} matrices for a group of order {}",
                self.label,
                self.matrices.len(),
                g.order()
            )));
        }
        if self.dim == 0 || self.matrices.iter().any(|m| m.nrows() != self.dim || m.ncols() != self.dim) {
            return Err(Error::InvalidRep(format!("{}: matrices are not all d×d", self.label)));
        }
        if spectral_norm(&(&self.matrices[g.identity()] - identity(self.dim))) > tol {
            return Err(Error::InvalidRep(format!("{}: π(e) ≠ I", self.label)));
        }
        let u = self.unitarity_residual();
        if u > tol {
            return Err(Error::InvalidRep(format!("{}: unitarity residual {u:e}", self.label)));
        }
        let h = self.homomorphism_residual(g);
        if h > tol {
            return Err(Error::InvalidRep(format!("{}: homomorphism residual {h:e}", self.label)));
        }
        Ok(())
    }

    /// ⟨χ_π, χ_π⟩ = 1 characterizes irreducibility.
    pub fn is_irreducible(&self, g: &FiniteGroup) -> bool {
        (character_inner(&self.character(), &self.character(), g) - cr(1.0)).norm() < 1e-8
    }

    /// Kronecker product representation of `G × H` in the product indexing.
    pub fn outer_tensor(&self, other: &Self) -> Self {
        let nb = other.matrices.len();
        let n = self.matrices.len() * nb;
        let matrices = (0..n)
            .map(|s| kron(&self.matrices[s / nb], &other.matrices[s % nb]))
            .collect();
        Self::unchecked(matrices, format!("{}⊗{}", self.label, other.label))
    }
}

/// (1/|G|) Σ_s a(s)·conj(b(s)).
pub fn character_inner(a: &[C64], b: &[C64], g: &FiniteGroup) -> C64 {
    let total: C64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    total / cr(g.order() as f64)
}

/// Left and right regular representations.
pub fn regular_reps(g: &FiniteGroup) -> (UnitaryRep, UnitaryRep) {
    let n = g.order();
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for s in g.elements() {
        let mut l = CMat::zeros(n, n);
        let mut r = CMat::zeros(n, n);
        for t in g.elements() {
            l[(g.mul(s, t), t)] = cr(1.0);
            r[(g.mul(t, g.inv(s)), t)] = cr(1.0);
        }
        left.push(l);
        right.push(r);
    }
    (UnitaryRep::unchecked(left, "left regular"), UnitaryRep::unchecked(right, "right regular"))
}

/// Right regular operator r_s alone.
pub fn right_regular(g: &FiniteGroup, s: usize) -> CMat {
    let n = g.order();
    let mut r = CMat::zeros(n, n);
    for t in g.elements() {
        r[(g.mul(t, g.inv(s)), t)] = cr(1.0);
    }
    r
}

/// Left regular operator l_s alone.
pub fn left_regular(g: &FiniteGroup, s: usize) -> CMat {
    let n = g.order();
    let mut l = CMat::zeros(n, n);
    for t in g.elements() {
        l[(g.mul(s, t), t)] = cr(1.0);
    }
    l
}

/// Complete list of pairwise inequivalent irreducible representations for the
/// built-in families: abelian groups, dihedral groups (including ones only
/// recognized from their table), symmetric groups up to degree 4 and direct
/// products of these.
pub fn irrep_catalog(g: &FiniteGroup) -> Result<Vec<UnitaryRep>> {
    let reps = catalog_raw(g)?;
    verify_irreps(g, reps)
}

/// Uses `user` when given (verified only), the catalog otherwise.
pub fn irreps_or_user(g: &FiniteGroup, user: Option<Vec<UnitaryRep>>) -> Result<Vec<UnitaryRep>> {
    match user {
        Some(reps) => verify_irreps(g, reps),
        None => irrep_catalog(g),
    }
}

/// Checks that `reps` is a complete list of inequivalent irreps of `g`.
pub fn verify_irreps(g: &FiniteGroup, reps: Vec<UnitaryRep>) -> Result<Vec<UnitaryRep>> {
    for r in &reps {
        r.check(g, TOL)?;
        if !r.is_irreducible(g) {
            return Err(Error::InvalidRep(format!("{} is reducible", r.label)));
        }
    }
    let chars: Vec<Vec<C64>> = reps.iter().map(|r| r.character()).collect();
    for i in 0..reps.len() {
        for j in 0..i {
            if character_inner(&chars[i], &chars[j], g).norm() > 1e-8 {
                return Err(Error::InvalidRep(format!(
                    "{} and {} are equivalent",
                    reps[i].label, reps[j].label
                )));
            }
        }
    }
    let total: usize = reps.iter().map(|r| r.dim() * r.dim()).sum();
    if total != g.order() {
        return Err(Error::InvalidRep(format!(
            "Σ d² = {total} but |G| = {}",
            g.order()
        )));
    }
    Ok(reps)
}

fn catalog_raw(g: &FiniteGroup) -> Result<Vec<UnitaryRep>> {
    if g.is_abelian() {
        return Ok(g
            .characters()?
            .iter()
            .enumerate()
            .map(|(k, ch)| UnitaryRep::from_character(ch, format!("chi{k}")))
            .collect());
    }
    match g.family() {
        Family::Symmetric(4) => return Ok(s4_irreps(g)),
        Family::Product(fa, fb) => {
            if let (Some(ga), Some(gb)) = (build_family(fa), build_family(fb)) {
                let ra = catalog_raw(&ga)?;
                let rb = catalog_raw(&gb)?;
                let mut out = Vec::new();
                for a in &ra {
                    for b in &rb {
                        out.push(a.outer_tensor(b));
                    }
                }
                return Ok(out);
            }
        }
        _ => {}
    }
    if let Some((r, s)) = g.dihedral_presentation() {
        return Ok(dihedral_irreps(g, r, s));
    }
    Err(Error::UnsupportedGroup(format!(
        "no irrep catalog entry for {} of order {}",
        g.family(),
        g.order()
    )))
}

fn build_family(f: &Family) -> Option<FiniteGroup> {
    fn desc(f: &Family) -> Option<GroupDescriptor> {
        Some(match f {
            Family::Cyclic(n) => GroupDescriptor::Cyclic(*n),
            Family::Dihedral(n) => GroupDescriptor::Dihedral(*n),
            Family::Symmetric(n) => GroupDescriptor::Symmetric(*n),
            Family::Product(a, b) => GroupDescriptor::Product(Box::new(desc(a)?), Box::new(desc(b)?)),
            Family::Semidirect | Family::Explicit => return None,
        })
    }
    FiniteGroup::build(&desc(f)?).ok()
}

/// Irreps from a presentation r^n = s² = e, srs = r⁻¹ with |G| = 2n.
fn dihedral_irreps(g: &FiniteGroup, r: usize, s: usize) -> Vec<UnitaryRep> {
    let n = g.order() / 2;
    // element index -> (k, f) with element = r^k s^f
    let mut decomp = vec![(0usize, 0usize); g.order()];
    let mut rk = g.identity();
    for k in 0..n {
        decomp[rk] = (k, 0);
        decomp[g.mul(rk, s)] = (k, 1);
        rk = g.mul(rk, r);
    }
    let one_dim = |label: &str, cr_: f64, cs: f64| {
        let m = decomp
            .iter()
            .map(|&(k, f)| {
                let v = cr_.powi(k as i32) * cs.powi(f as i32);
                CMat::from_element(1, 1, cr(v))
            })
            .collect();
        UnitaryRep::unchecked(m, label)
    };
    let mut out = vec![one_dim("trivial", 1.0, 1.0), one_dim("sign", 1.0, -1.0)];
    if n.is_multiple_of(2) {
        out.push(one_dim("alt+", -1.0, 1.0));
        out.push(one_dim("alt-", -1.0, -1.0));
    }
    let x = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
    for j in 1..=(n - 1) / 2 {
        let m = decomp
            .iter()
            .map(|&(k, f)| {
                let w = root_of_unity((j * k) as f64 / n as f64);
                let rot = diag(&[w, w.conj()]);
                if f == 0 {
                    rot
                } else {
                    rot * &x
                }
            })
            .collect();
        out.push(UnitaryRep::unchecked(m, format!("rho{j}")));
    }
    out
}

/// Orthonormal real basis of the sum-zero subspace of R^n, as an n×(n−1) matrix.
fn helmert(n: usize) -> CMat {
    let mut b = CMat::zeros(n, n - 1);
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            b[(i, k - 1)] = cr(1.0 / norm);
        }
        b[(k, k - 1)] = cr(-(k as f64) / norm);
    }
    b
}

fn permutation_matrix(p: &[usize]) -> CMat {
    let n = p.len();
    let mut m = CMat::zeros(n, n);
    for (i, &pi) in p.iter().enumerate() {
        m[(pi, i)] = cr(1.0);
    }
    m
}

fn sign_of(p: &[usize]) -> f64 {
    let mut s = 1.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

fn s4_irreps(g: &FiniteGroup) -> Vec<UnitaryRep> {
    let perms = symmetric_elements(4);
    let h4 = helmert(4);
    let h3 = helmert(3);
    let pairings: [[usize; 4]; 3] = [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]];
    let pairing_index = |a: usize, b: usize| -> usize {
        let (lo, hi) = (a.min(b), a.max(b));
        pairings
            .iter()
            .position(|p| (p[0] == lo && p[1] == hi) || (p[2] == lo && p[3] == hi))
            .unwrap()
    };
    let mut triv = Vec::new();
    let mut sign = Vec::new();
    let mut std = Vec::new();
    let mut std_sign = Vec::new();
    let mut two = Vec::new();
    for p in perms.iter().take(g.order()) {
        let sg = sign_of(p);
        triv.push(CMat::from_element(1, 1, cr(1.0)));
        sign.push(CMat::from_element(1, 1, cr(sg)));
        let st = h4.adjoint() * permutation_matrix(p) * &h4;
        std_sign.push(&st * cr(sg));
        std.push(st);
        let tau: Vec<usize> = pairings.iter().map(|q| pairing_index(p[q[0]], p[q[1]])).collect();
        two.push(h3.adjoint() * permutation_matrix(&tau) * &h3);
    }
    vec![
        UnitaryRep::unchecked(triv, "trivial"),
        UnitaryRep::unchecked(sign, "sign"),
        UnitaryRep::unchecked(two, "two"),
        UnitaryRep::unchecked(std, "standard"),
        UnitaryRep::unchecked(std_sign, "standard⊗sign"),
    ]
}

/// A normalized positive definite function.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveDefiniteFunction {
    values: Vec<C64>,
}

/// Outcome of a positive-definiteness test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdVerdict {
    pub positive_definite: bool,
    pub min_eigenvalue: f64,
    pub hermitian_defect: f64,
}

/// The |G|×|G| matrix [φ(st⁻¹)].
pub fn gram_matrix(values: &[C64], g: &FiniteGroup) -> CMat {
    let n = g.order();
    CMat::from_fn(n, n, |s, t| values[g.mul(s, g.inv(t))])
}

/// Decides whether φ is positive definite; φ(e) must equal 1.
pub fn check_positive_definite(values: &[C64], g: &FiniteGroup) -> Result<PdVerdict> {
    if values.len() != g.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a group of order {}",
            values.len(),
            g.order()
        )));
    }
    let at_e = values[g.identity()];
    if (at_e - cr(1.0)).norm() > 1e-12 {
        return Err(Error::NotNormalizedAtIdentity(format!("φ(e) = {at_e}")));
    }
    let k = gram_matrix(values, g);
    let hermitian_defect = spectral_norm(&(&k - k.adjoint()));
    let min_eigenvalue = hermitian_eigen(&k).0.last().cloned().unwrap_or(0.0);
    Ok(PdVerdict {
        positive_definite: hermitian_defect <= TOL && min_eigenvalue >= -TOL,
        min_eigenvalue,
        hermitian_defect,
    })
}

impl PositiveDefiniteFunction {
    pub fn new(g: &FiniteGroup, values: Vec<C64>) -> Result<Self> {
        let v = check_positive_definite(&values, g)?;
        if !v.positive_definite {
            return Err(Error::NotPositiveDefinite(v.min_eigenvalue.min(-v.hermitian_defect)));
        }
        Ok(Self { values })
    }

    pub fn constant_one(g: &FiniteGroup) -> Self {
        Self { values: vec![cr(1.0); g.order()] }
    }

    /// δ_e, the indicator of the identity.
    pub fn delta_e(g: &FiniteGroup) -> Self {
        let mut v = vec![cr(0.0); g.order()];
        v[g.identity()] = cr(1.0);
        Self { values: v }
    }

    pub fn from_character(ch: &Character) -> Self {
        Self { values: ch.values.clone() }
    }

    /// Indicator function of a subgroup.
    pub fn subgroup_indicator(g: &FiniteGroup, h: &[usize]) -> Result<Self> {
        if !g.is_subgroup(h) {
            return Err(Error::NotASubgroup);
        }
        let mut v = vec![cr(0.0); g.order()];
        for &s in h {
            v[s] = cr(1.0);
        }
        Ok(Self { values: v })
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise product (again positive definite).
    pub fn product(&self, other: &Self) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect() }
    }

    /// Pointwise conjugate (again positive definite).
    pub fn conj(&self) -> Self {
        Self { values: self.values.iter().map(|v| v.conj()).collect() }
    }

    /// Convex combination Σ wᵢ φᵢ.
    pub fn mixture(parts: &[(f64, &Self)]) -> Self {
        let n = parts[0].1.len();
        let mut v = vec![cr(0.0); n];
        for (w, f) in parts {
            for (acc, x) in v.iter_mut().zip(&f.values) {
                *acc += x * cr(*w);
            }
        }
        Self { values: v }
    }

    /// G_φ = {s : |φ(s) − 1| ≤ 1e-9}.
    pub fn unit_set(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| (*v - cr(1.0)).norm() <= 1e-9)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn gram(&self, g: &FiniteGroup) -> CMat {
        gram_matrix(&self.values, g)
    }
}

/// φ(s) = ⟨π(s)ξ, ξ⟩ = ξ†π(s)ξ.
pub fn pdf_from_rep(pi: &UnitaryRep, xi: &CVec) -> Result<PositiveDefiniteFunction> {
    let norm = xi.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitVector(norm));
    }
    if xi.len() != pi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a {}-dim representation",
            xi.len(),
            pi.dim()
        )));
    }
    let values = pi.matrices().iter().map(|u| xi.dotc(&(u * xi))).collect();
    Ok(PositiveDefiniteFunction { values })
}

/// Cyclic representation attached to φ with its canonical factorization.
#[derive(Debug, Clone)]
pub struct Gns {
    pub rep: UnitaryRep,
    pub xi: CVec,
    pub rank: usize,
    /// |G|×r factor X with C_φ = X X†; row s is conj(π(s)*ξ).
    pub factor: CMat,
}

impl Gns {
    /// The vector π(s)*ξ.
    pub fn translate(&self, s: usize) -> CVec {
        self.factor.row(s).adjoint()
    }
}

/// Factors a PSD matrix as X X† with X = V√Λ over eigenvalues above the
/// relative rank threshold. Columns follow descending eigenvalues.
pub fn psd_factor(k: &CMat) -> (CMat, Vec<f64>) {
    let (vals, vecs) = hermitian_eigen(k);
    let top = vals.first().cloned().unwrap_or(0.0).max(0.0);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > RANK_TOL * top && vals[i] > 0.0).collect();
    let n = k.nrows();
    let mut x = CMat::zeros(n, keep.len());
    let mut kept = Vec::with_capacity(keep.len());
    for (col, &i) in keep.iter().enumerate() {
        let sq = vals[i].sqrt();
        x.set_column(col, &(vecs.column(i) * cr(sq)));
        kept.push(vals[i]);
    }
    (x, kept)
}

pub fn gns(phi: &PositiveDefiniteFunction, g: &FiniteGroup) -> Result<Gns> {
    let k = phi.gram(g);
    let (x, lambdas) = psd_factor(&k);
    let r = lambdas.len();
    let w = x.adjoint(); // columns w_t = π(t)*ξ
    let lambda_inv = diag(&lambdas.iter().map(|l| cr(1.0 / l)).collect::<Vec<_>>());
    let mut matrices = Vec::with_capacity(g.order());
    for s in g.elements() {
        let ws = CMat::from_fn(r, g.order(), |i, t| w[(i, g.mul(t, s))]);
        let pi_s_star = ws * &x * &lambda_inv;
        matrices.push(pi_s_star.adjoint());
    }
    let rep = UnitaryRep::unchecked(matrices, "gns");
    let resid = rep.unitarity_residual().max(rep.homomorphism_residual(g));
    if resid > 1e-8 {
        return Err(Error::NumericalFailure(format!("GNS representation defect {resid:e}")));
    }
    let xi = w.column(g.identity()).into_owned();
    Ok(Gns { rep, xi, rank: r, factor: x })
}

/// F[χ,s] = conj(χ(s))/√|G|.
pub fn fourier_matrix(g: &FiniteGroup) -> Result<CMat> {
    let chars = g.characters()?;
    let n = g.order();
    let scale = 1.0 / (n as f64).sqrt();
    Ok(CMat::from_fn(n, n, |k, s| chars[k].values[s].conj() * cr(scale)))
}

/// Dual group Ĝ with elements ordered as `g.characters()`.
pub fn dual_group(g: &FiniteGroup) -> Result<FiniteGroup> {
    let chars = g.characters()?;
    let n = g.order();
    let find = |vals: &[C64]| {
        chars
            .iter()
            .position(|ch| ch.values.iter().zip(vals).all(|(a, b)| (a - b).norm() < 1e-9))
    };
    let mut table = vec![vec![0; n]; n];
    for a in 0..n {
        for b in 0..n {
            let prod: Vec<C64> = (0..n).map(|s| chars[a].values[s] * chars[b].values[s]).collect();
            table[a][b] = find(&prod)
                .ok_or_else(|| Error::NumericalFailure("characters not closed under product".into()))?;
        }
    }
    let labels = (0..n).map(|k| format!("chi{k}")).collect();
    FiniteGroup::from_table(table, Some(labels), g.family().clone(), g.cyclic_factors().map(|f| f.to_vec()))
}

/// μ̂(χ) = Σ_s conj(χ(s))·μ(s), a positive definite function on Ĝ.
pub fn fourier_of_measure(mu: &ProbabilityMeasure, g: &FiniteGroup) -> Result<PositiveDefiniteFunction> {
    let chars = g.characters()?;
    let values = chars
        .iter()
        .map(|ch| {
            ch.values
                .iter()
                .zip(mu.weights())
                .map(|(x, &w)| x.conj() * cr(w))
                .sum()
        })
        .collect();
    Ok(PositiveDefiniteFunction { values })
}

/// Σ_t p(t)·χᵗ: the positive definite function on G attached to a measure on Ĝ.
pub fn pdf_from_dual_measure(p: &ProbabilityMeasure, g: &FiniteGroup) -> Result<PositiveDefiniteFunction> {
    let chars = g.characters()?;
    let mut values = vec![c(0.0, 0.0); g.order()];
    for (ch, &w) in chars.iter().zip(p.weights()) {
        for (acc, v) in values.iter_mut().zip(&ch.values) {
            *acc += v * cr(w);
        }
    }
    Ok(PositiveDefiniteFunction { values })
}
