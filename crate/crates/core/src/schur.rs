//! Correlation matrices, extremality among bistochastic Schur maps, Bloch
//! geometry of rank-r factorizations, the rank-2 dichotomy and the search for
//! maximally extreme positive definite functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::linalg::{
    c, cr, diag, hermitian_eigen, identity, matrix_unit, numerical_rank, rank_from_values, singular_values,
    spectral_norm, CMat, CVec, C64, RANK_TOL, TOL,
};
use crate::rep::{pdf_from_rep, psd_factor, PositiveDefiniteFunction, UnitaryRep};

/// PSD matrix with unit diagonal and its canonical factorization A = X X†.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    matrix: CMat,
    factor: CMat,
}

impl CorrelationMatrix {
    pub fn new(matrix: CMat) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("correlation matrix must be square".into()));
        }
        let herm = spectral_norm(&(&matrix - matrix.adjoint()));
        if herm > TOL {
            return Err(Error::NotPositiveDefinite(-herm));
        }
        if let Some(i) = (0..matrix.nrows()).find(|&i| (matrix[(i, i)] - cr(1.0)).norm() > 1e-12) {
            return Err(Error::NotNormalizedAtIdentity(format!("diagonal entry {i} is {}", matrix[(i, i)])));
        }
        let min = hermitian_eigen(&matrix).0.last().cloned().unwrap_or(0.0);
        if min < -TOL {
            return Err(Error::NotPositiveDefinite(min));
        }
        let (factor, _) = psd_factor(&matrix);
        Ok(Self { matrix, factor })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// d×r factor X.
    pub fn factor(&self) -> &CMat {
        &self.factor
    }

    /// ξⱼ: column j of X†, so that A[i,j] = ξᵢ†ξⱼ.
    pub fn vectors(&self) -> Vec<CVec> {
        (0..self.dim()).map(|j| self.factor.row(j).adjoint()).collect()
    }

    /// The Schur map ρ ↦ A ∘ ρ.
    pub fn schur_apply(&self, rho: &CMat) -> CMat {
        self.matrix.component_mul(rho)
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im.abs() <= 1e-12)
    }
}

/// C_φ with entries φ(st⁻¹).
pub fn correlation_matrix(phi: &PositiveDefiniteFunction, g: &FiniteGroup) -> Result<CorrelationMatrix> {
    CorrelationMatrix::new(phi.gram(g))
}

/// Real coordinates of a Hermitian r×r matrix (diagonal, then real and
/// imaginary parts above the diagonal).
fn hermitian_coords(h: &CMat) -> Vec<f64> {
    let r = h.nrows();
    let mut v = Vec::with_capacity(r * r);
    for i in 0..r {
        v.push(h[(i, i)].re);
    }
    for i in 0..r {
        for j in i + 1..r {
            v.push(h[(i, j)].re);
            v.push(h[(i, j)].im);
        }
    }
    v
}

fn real_rank(rows: &[Vec<f64>]) -> usize {
    if rows.is_empty() || rows[0].is_empty() {
        return 0;
    }
    let m = CMat::from_fn(rows.len(), rows[0].len(), |i, j| cr(rows[i][j]));
    numerical_rank(&m, RANK_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExtremeReport {
    pub verdict: bool,
    pub span_dim: usize,
    pub r_squared: usize,
}

/// Extreme iff the rank-one matrices ξⱼξⱼ† span all r×r Hermitian matrices.
pub fn is_extreme_correlation(a: &CorrelationMatrix) -> ExtremeReport {
    let r = a.rank();
    let rows: Vec<Vec<f64>> = a.vectors().iter().map(|x| hermitian_coords(&(x * x.adjoint()))).collect();
    let span_dim = real_rank(&rows);
    ExtremeReport { verdict: span_dim == r * r, span_dim, r_squared: r * r }
}

/// Generalized Gell-Mann matrices: symmetric, antisymmetric, then diagonal,
/// normalized to tr(σₐσ_b) = 2δ_ab. For r = 2 these are X, Y, Z.
pub fn gell_mann(r: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(r * r - 1);
    for j in 0..r {
        for k in j + 1..r {
            out.push(matrix_unit(r, j, k) + matrix_unit(r, k, j));
        }
    }
    for j in 0..r {
        for k in j + 1..r {
            out.push(matrix_unit(r, j, k) * c(0.0, -1.0) + matrix_unit(r, k, j) * c(0.0, 1.0));
        }
    }
    for l in 1..r {
        let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut d = vec![cr(0.0); r];
        for x in d.iter_mut().take(l) {
            *x = cr(scale);
        }
        d[l] = cr(-(l as f64) * scale);
        out.push(diag(&d));
    }
    out
}

/// Bloch vectors of the states ξⱼξⱼ†. Rank-one orbits are embedded in
/// C² (`basis_rank` = 2) so that they sit at the pole (0, 0, 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlochOrbit {
    pub rank: usize,
    pub basis_rank: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl BlochOrbit {
    /// ρ = (1/r)I + (1/2) v·σ.
    pub fn reconstruct(&self, j: usize) -> CMat {
        let gens = gell_mann(self.basis_rank);
        let mut rho = identity(self.basis_rank) * cr(1.0 / self.basis_rank as f64);
        for (v, s) in self.vectors[j].iter().zip(&gens) {
            rho += s * cr(0.5 * v);
        }
        rho
    }

    pub fn affine_span_dim(&self) -> usize {
        affine_span_dim(&self.vectors).unwrap_or(0)
    }
}

pub fn bloch_vector(x: &CVec, gens: &[CMat]) -> Vec<f64> {
    gens.iter().map(|s| x.dotc(&(s * x)).re).collect()
}

pub fn bloch_vectors(a: &CorrelationMatrix) -> BlochOrbit {
    let r = a.rank();
    let basis_rank = r.max(2);
    let gens = gell_mann(basis_rank);
    let vectors = a
        .vectors()
        .iter()
        .map(|x| {
            let mut padded = CVec::zeros(basis_rank);
            padded.rows_mut(0, r).copy_from(x);
            bloch_vector(&padded, &gens)
        })
        .collect();
    BlochOrbit { rank: r, basis_rank, vectors }
}

fn centered(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = vectors.len() as f64;
    let k = vectors[0].len();
    let mean: Vec<f64> = (0..k).map(|i| vectors.iter().map(|v| v[i]).sum::<f64>() / n).collect();
    vectors.iter().map(|v| v.iter().zip(&mean).map(|(a, b)| a - b).collect()).collect()
}

/// Rank of the centered point cloud.
pub fn affine_span_dim(vectors: &[Vec<f64>]) -> Result<usize> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput);
    }
    let c = centered(vectors);
    // absolute floor so that a cloud of identical points has dimension 0
    let sv = singular_values(&CMat::from_fn(c.len(), c[0].len(), |i, j| cr(c[i][j])));
    if sv.first().is_none_or(|&s| s <= 1e-12) {
        return Ok(0);
    }
    Ok(rank_from_values(&sv, RANK_TOL))
}

/// Singular values of the centered Bloch matrix, descending.
pub fn centered_singular_values(vectors: &[Vec<f64>]) -> Vec<f64> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let c = centered(vectors);
    singular_values(&CMat::from_fn(c.len(), c[0].len(), |i, j| cr(c[i][j])))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxExtremeCertificate {
    pub extreme: bool,
    pub rank: usize,
    pub span_dim: usize,
    pub rank_at_least_two: bool,
    pub non_real: bool,
    pub aqbc_violation: bool,
}

/// Extremality of Θ̂(φ) among bistochastic maps, with the AQBC certificate
/// (extreme and rank ≥ 2; real φ are never extreme at rank ≥ 2).
pub fn is_maximally_extreme(phi: &PositiveDefiniteFunction, g: &FiniteGroup) -> Result<MaxExtremeCertificate> {
    let a = correlation_matrix(phi, g)?;
    let rep = is_extreme_correlation(&a);
    let non_real = phi.values().iter().any(|v| v.im.abs() > 1e-12);
    let rank = a.rank();
    Ok(MaxExtremeCertificate {
        extreme: rep.verdict,
        rank,
        span_dim: rep.span_dim,
        rank_at_least_two: rank >= 2,
        non_real,
        aqbc_violation: rep.verdict && rank >= 2,
    })
}

/// Outcome of the rank-2 dichotomy.
#[derive(Debug, Clone, PartialEq)]
pub enum Dichotomy {
    Extreme,
    RandomUnitary { weights: [f64; 2], unitaries: [CMat; 2] },
}

impl Dichotomy {
    pub fn channel(&self) -> Option<QuantumChannel> {
        match self {
            Dichotomy::Extreme => None,
            Dichotomy::RandomUnitary { weights, unitaries } => QuantumChannel::from_kraus_unchecked(
                (0..2).map(|k| &unitaries[k] * cr(weights[k].sqrt())).collect(),
            )
            .ok(),
        }
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(&a, &a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn any_orthogonal(a: &[f64; 3]) -> [f64; 3] {
    let trial = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    normalize(cross(a, &trial))
}

/// Either certifies extremality (affine span of the Bloch orbit is 3) or
/// writes the Schur map as w₁M₁ρM₁† + w₂M₂ρM₂† with diagonal unitaries.
pub fn dichotomy_decompose(a: &CorrelationMatrix) -> Result<Dichotomy> {
    if a.rank() != 2 {
        return Err(Error::RankNotTwo(a.rank()));
    }
    let orbit = bloch_vectors(a);
    let pts: Vec<[f64; 3]> = orbit.vectors.iter().map(|v| [v[0], v[1], v[2]]).collect();
    let dim = affine_span_dim(&orbit.vectors)?;
    let n = match dim {
        3 => return Ok(Dichotomy::Extreme),
        2 => {
            let c = centered(&orbit.vectors);
            let m = CMat::from_fn(c.len(), 3, |i, j| cr(c[i][j]));
            let m = if m.nrows() < 3 {
                let mut p = CMat::zeros(3, 3);
                p.view_mut((0, 0), (m.nrows(), 3)).copy_from(&m);
                p
            } else {
                m
            };
            let svd = m.svd(false, true);
            let vt = svd.v_t.expect("requested");
            let k = (0..3)
                .min_by(|&i, &j| svd.singular_values[i].partial_cmp(&svd.singular_values[j]).unwrap())
                .unwrap();
            normalize([vt[(k, 0)].re, vt[(k, 1)].re, vt[(k, 2)].re])
        }
        1 => {
            let va = pts[0];
            let vb = *pts
                .iter()
                .max_by(|x, y| {
                    let dx = (0..3).map(|i| (x[i] - va[i]).powi(2)).sum::<f64>();
                    let dy = (0..3).map(|i| (y[i] - va[i]).powi(2)).sum::<f64>();
                    dx.partial_cmp(&dy).unwrap()
                })
                .unwrap();
            let s = [va[0] + vb[0], va[1] + vb[1], va[2] + vb[2]];
            if dot(&s, &s).sqrt() < 1e-9 {
                any_orthogonal(&va)
            } else {
                normalize(s)
            }
        }
        _ => [0.0, 0.0, 1.0],
    };
    let gens = gell_mann(2);
    let n_sigma = &gens[0] * cr(n[0]) + &gens[1] * cr(n[1]) + &gens[2] * cr(n[2]);
    let (_, basis) = hermitian_eigen(&n_sigma); // columns: +1 then −1 eigenvectors
    let e1: CVec = basis.column(0).into_owned();
    let e2: CVec = basis.column(1).into_owned();
    let proj = |p: &[f64; 3]| {
        let t = dot(p, &n);
        [p[0] - t * n[0], p[1] - t * n[1], p[2] - t * n[2]]
    };
    let xs = a.vectors();
    let x1 = &xs[0];
    let p1 = proj(&pts[0]);
    let rotation = |theta: f64| {
        identity(2) * cr((theta / 2.0).cos()) - &n_sigma * c(0.0, (theta / 2.0).sin())
    };
    let d = a.dim();
    let mut m1 = vec![cr(0.0); d];
    let mut m2 = vec![cr(0.0); d];
    for j in 0..d {
        let pj = proj(&pts[j]);
        let theta0 = if dim == 0 { 0.0 } else { dot(&n, &cross(&p1, &pj)).atan2(dot(&p1, &pj)) };
        // pick the rotation sense that actually carries ξ₁ onto the ray of ξⱼ
        let (theta, alpha) = [theta0, -theta0]
            .iter()
            .map(|&t| {
                let y = rotation(t) * x1;
                (t, y.dotc(&xs[j]))
            })
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap();
        if (alpha.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::NumericalFailure(format!(
                "rotation does not map the first vector onto vector {j} (overlap {})",
                alpha.norm()
            )));
        }
        let alpha = alpha / cr(alpha.norm());
        let l1 = C64::from_polar(1.0, -theta / 2.0);
        let l2 = C64::from_polar(1.0, theta / 2.0);
        m1[j] = (alpha * l1).conj();
        m2[j] = (alpha * l2).conj();
    }
    let weights = [e1.dotc(x1).norm_sqr(), e2.dotc(x1).norm_sqr()];
    let unitaries = [diag(&m1), diag(&m2)];
    let out = Dichotomy::RandomUnitary { weights, unitaries };
    let ch = out.channel().expect("random unitary");
    for s in 0..d {
        for t in 0..d {
            let e = matrix_unit(d, s, t);
            let r = spectral_norm(&(ch.apply(&e) - a.schur_apply(&e)));
            if r > TOL {
                return Err(Error::NumericalFailure(format!("dichotomy reconstruction residual {r:e}")));
            }
        }
    }
    Ok(out)
}

/// Search configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AqbcConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub refine: bool,
    /// Vectors evaluated before the random samples, at indices 0, 1, ….
    pub injected: Vec<CVec>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AqbcCertificate {
    pub sample_index: usize,
    /// ξ as (re, im) pairs.
    pub xi: Vec<[f64; 2]>,
    pub rank: usize,
    pub span_dim: usize,
    pub affine_span_dim: usize,
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AqbcRejection {
    pub sample_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AqbcReport {
    pub samples: usize,
    pub certificates: Vec<AqbcCertificate>,
    pub rejections: Vec<AqbcRejection>,
}

/// Random unit vector with i.i.d. complex Gaussian entries.
pub fn random_unit_vector<R: Rng>(rng: &mut R, d: usize) -> CVec {
    loop {
        let v = CVec::from_fn(d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let n = v.norm();
        if n > 1e-12 {
            return v / cr(n);
        }
    }
}

/// Generator for sample `index`; independent of thread scheduling.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn evaluate(
    g: &FiniteGroup,
    pi: &UnitaryRep,
    xi: &CVec,
) -> Result<(MaxExtremeCertificate, usize, f64)> {
    let phi = pdf_from_rep(pi, xi)?;
    let a = correlation_matrix(&phi, g)?;
    let cert = is_maximally_extreme(&phi, g)?;
    let orbit = bloch_vectors(&a);
    let r = a.rank();
    let sv = centered_singular_values(&orbit.vectors);
    let score = if r >= 2 { sv.get(r * r - 2).cloned().unwrap_or(0.0) } else { 0.0 };
    Ok((cert, orbit.affine_span_dim(), score))
}

fn hill_climb(g: &FiniteGroup, pi: &UnitaryRep, start: &CVec, rng: &mut ChaCha8Rng) -> CVec {
    let mut best = start.clone();
    let mut best_score = evaluate(g, pi, &best).map(|x| x.2).unwrap_or(0.0);
    let mut step = 0.3;
    for _ in 0..200 {
        let dir = random_unit_vector(rng, best.len());
        let cand = &best + dir * cr(step);
        let cand = &cand / cr(cand.norm());
        let score = evaluate(g, pi, &cand).map(|x| x.2).unwrap_or(0.0);
        if score > best_score {
            best = cand;
            best_score = score;
        } else {
            step *= 0.95;
        }
    }
    best
}

/// Samples unit vectors ξ and certifies those for which ⟨π(·)ξ, ξ⟩ is
/// maximally extreme. Results are ordered by sample index.
pub fn aqbc_search(g: &FiniteGroup, pi: &UnitaryRep, config: &AqbcConfig) -> Result<AqbcReport> {
    if pi.dim() < 2 {
        return Err(Error::RepresentationDimensionOne);
    }
    pi.check(g, TOL)?;
    let total = config.injected.len() + config.n_samples;
    let outcomes: Vec<std::result::Result<AqbcCertificate, AqbcRejection>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rng = sample_rng(config.seed, idx);
            let xi = if idx < config.injected.len() {
                let v = &config.injected[idx];
                v / cr(v.norm())
            } else {
                random_unit_vector(&mut rng, pi.dim())
            };
            let reject = |reason: String| Err(AqbcRejection { sample_index: idx, reason });
            let (mut cert, mut aff, _) = match evaluate(g, pi, &xi) {
                Ok(x) => x,
                Err(e) => return reject(e.to_string()),
            };
            let mut xi = xi;
            let mut refined = false;
            if !cert.extreme && cert.non_real && config.refine {
                let better = hill_climb(g, pi, &xi, &mut rng);
                if let Ok((c2, a2, _)) = evaluate(g, pi, &better) {
                    if c2.aqbc_violation {
                        cert = c2;
                        aff = a2;
                        xi = better;
                        refined = true;
                    }
                }
            }
            if !cert.non_real {
                return reject("real correlation matrix".into());
            }
            if !cert.rank_at_least_two {
                return reject(format!("rank {} < 2", cert.rank));
            }
            if !cert.extreme {
                return reject(format!("not extreme: span dimension {} < {}", cert.span_dim, cert.rank * cert.rank));
            }
            Ok(AqbcCertificate {
                sample_index: idx,
                xi: xi.iter().map(|z| [z.re, z.im]).collect(),
                rank: cert.rank,
                span_dim: cert.span_dim,
                affine_span_dim: aff,
                refined,
            })
        })
        .collect();
    let mut certificates = Vec::new();
    let mut rejections = Vec::new();
    for o in outcomes {
        match o {
            Ok(c) => certificates.push(c),
            Err(r) => rejections.push(r),
        }
    }
    Ok(AqbcReport { samples: total, certificates, rejections })
}

/// Volume of the convex hull of points in R³ (0 when they do not span 3-space).
pub fn hull_volume(points: &[[f64; 3]]) -> f64 {
    let n = points.len();
    if n < 4 {
        return 0.0;
    }
    let vecs: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
    if affine_span_dim(&vecs).unwrap_or(0) < 3 {
        return 0.0;
    }
    let centroid = {
        let mut c = [0.0; 3];
        for p in points {
            for i in 0..3 {
                c[i] += p[i] / n as f64;
            }
        }
        c
    };
    let sub = |a: &[f64; 3], b: &[f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let eps = 1e-10;
    let mut planes: Vec<([f64; 3], f64)> = Vec::new();
    let mut volume = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let nrm = cross(&sub(&points[j], &points[i]), &sub(&points[k], &points[i]));
                let len = dot(&nrm, &nrm).sqrt();
                if len < 1e-12 {
                    continue;
                }
                let mut u = [nrm[0] / len, nrm[1] / len, nrm[2] / len];
                let mut off = dot(&u, &points[i]);
                if dot(&u, &centroid) > off {
                    u = [-u[0], -u[1], -u[2]];
                    off = -off;
                }
                if points.iter().any(|p| dot(&u, p) > off + eps) {
                    continue;
                }
                if planes.iter().any(|(q, o)| dot(q, &u) > 1.0 - 1e-9 && (o - off).abs() < 1e-9) {
                    continue;
                }
                planes.push((u, off));
                // polygon on this face, ordered by angle around its centroid
                let face: Vec<[f64; 3]> = points.iter().filter(|p| (dot(&u, p) - off).abs() <= eps).cloned().collect();
                let fc = {
                    let mut c = [0.0; 3];
                    for p in &face {
                        for t in 0..3 {
                            c[t] += p[t] / face.len() as f64;
                        }
                    }
                    c
                };
                let ax = normalize(sub(&face[0], &fc));
                let ay = cross(&u, &ax);
                let mut ordered: Vec<(f64, [f64; 3])> = face
                    .iter()
                    .map(|p| {
                        let d = sub(p, &fc);
                        (dot(&d, &ay).atan2(dot(&d, &ax)), *p)
                    })
                    .collect();
                ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let mut area = [0.0; 3];
                for t in 0..ordered.len() {
                    let a = sub(&ordered[t].1, &fc);
                    let b = sub(&ordered[(t + 1) % ordered.len()].1, &fc);
                    let cr_ = cross(&a, &b);
                    for q in 0..3 {
                        area[q] += 0.5 * cr_[q];
                    }
                }
                let area = dot(&area, &u).abs();
                volume += area * (off - dot(&u, &centroid)) / 3.0;
            }
        }
    }
    volume
}

/// Output document format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

#[derive(Serialize)]
struct OrbitRow<'a> {
    label: &'a str,
    v: &'a [f64],
}

#[derive(Serialize)]
struct OrbitDoc<'a> {
    group: &'a str,
    rank: usize,
    affine_span_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    hull_volume: Option<f64>,
    rows: Vec<OrbitRow<'a>>,
}

/// One row per group element: label and Bloch coordinates.
pub fn export_bloch_orbit(
    orbit: &BlochOrbit,
    labels: &[String],
    group: &str,
    format: ExportFormat,
) -> Result<String> {
    if labels.len() != orbit.vectors.len() {
        return Err(Error::DimensionMismatch("one label per Bloch vector required".into()));
    }
    let aff = orbit.affine_span_dim();
    let hull = (orbit.basis_rank == 2).then(|| {
        let pts: Vec<[f64; 3]> = orbit.vectors.iter().map(|v| [v[0], v[1], v[2]]).collect();
        hull_volume(&pts)
    });
    match format {
        ExportFormat::Csv => {
            let k = orbit.basis_rank * orbit.basis_rank - 1;
            let mut s = format!("# group: {group}\n# rank: {}\n# affine_span_dim: {aff}\n", orbit.rank);
            if let Some(v) = hull {
                s.push_str(&format!("# hull_volume: {v:.16e}\n"));
            }
            s.push_str("label");
            for i in 1..=k {
                s.push_str(&format!(",v{i}"));
            }
            s.push('\n');
            for (l, v) in labels.iter().zip(&orbit.vectors) {
                s.push_str(&csv_field(l));
                for x in v {
                    s.push_str(&format!(",{x:.16e}"));
                }
                s.push('\n');
            }
            Ok(s)
        }
        ExportFormat::Json => {
            let doc = OrbitDoc {
                group,
                rank: orbit.rank,
                affine_span_dim: aff,
                hull_volume: hull,
                rows: labels.iter().zip(&orbit.vectors).map(|(l, v)| OrbitRow { label: l, v }).collect(),
            };
            Ok(serde_json::to_string_pretty(&doc)?)
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupDescriptor;
    use crate::rep::irrep_catalog;

    fn s3() -> (FiniteGroup, UnitaryRep) {
        let g = FiniteGroup::build(&GroupDescriptor::Symmetric(3)).unwrap();
        let pi = irrep_catalog(&g).unwrap().into_iter().find(|r| r.dim() == 2).unwrap();
        (g, pi)
    }

    fn vec2(a: C64, b: C64) -> CVec {
        CVec::from_vec(vec![a, b])
    }

    fn extreme_xi() -> CVec {
        let s = 10f64.sqrt();
        vec2(c(0.0, 1.0 / s), cr(3.0 / s))
    }

    fn planar_xi() -> CVec {
        let s = 2f64.sqrt();
        vec2(cr(1.0 / s), c(0.0, 1.0 / s))
    }

    fn corr(xi: &CVec) -> CorrelationMatrix {
        let (g, pi) = s3();
        correlation_matrix(&pdf_from_rep(&pi, xi).unwrap(), &g).unwrap()
    }

    #[test]
    fn trivial_correlation_matrices() {
        let (g, _) = s3();
        let id = correlation_matrix(&PositiveDefiniteFunction::delta_e(&g), &g).unwrap();
        assert_eq!(id.matrix(), &identity(6));
        let ones = correlation_matrix(&PositiveDefiniteFunction::constant_one(&g), &g).unwrap();
        assert!(ones.matrix().iter().all(|z| *z == cr(1.0)));
        assert_eq!(ones.rank(), 1);
    }

    #[test]
    fn factor_reproduces_matrix() {
        let a = corr(&extreme_xi());
        assert!(spectral_norm(&(a.factor() * a.factor().adjoint() - a.matrix())) < 1e-12);
        let xs = a.vectors();
        for i in 0..6 {
            for j in 0..6 {
                assert!((xs[i].dotc(&xs[j]) - a.matrix()[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn extremality_examples() {
        let r = is_extreme_correlation(&corr(&extreme_xi()));
        assert_eq!((r.verdict, r.span_dim, r.r_squared), (true, 4, 4));
        let e1 = vec2(cr(1.0), cr(0.0));
        assert!(!is_extreme_correlation(&corr(&e1)).verdict);
        let (g, _) = s3();
        let d = correlation_matrix(&PositiveDefiniteFunction::delta_e(&g), &g).unwrap();
        let r = is_extreme_correlation(&d);
        assert_eq!((r.verdict, r.span_dim), (false, 6));
    }

    #[test]
    fn gell_mann_is_orthonormal() {
        for r in 2..5 {
            let gm = gell_mann(r);
            assert_eq!(gm.len(), r * r - 1);
            for (i, a) in gm.iter().enumerate() {
                assert!(a.trace().norm() < 1e-14);
                for (j, b) in gm.iter().enumerate() {
                    let t = (a * b).trace();
                    let want = if i == j { 2.0 } else { 0.0 };
                    assert!((t - cr(want)).norm() < 1e-12);
                }
            }
        }
        let p = gell_mann(2);
        assert_eq!(p[1], CMat::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)]));
    }

    #[test]
    fn bloch_vectors_of_pure_states() {
        let a = corr(&extreme_xi());
        let orbit = bloch_vectors(&a);
        let xs = a.vectors();
        for (j, v) in orbit.vectors.iter().enumerate() {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
            let want = &xs[j] * xs[j].adjoint();
            assert!(spectral_norm(&(orbit.reconstruct(j) - want)) < 1e-10);
        }
        let gens = gell_mann(2);
        assert_eq!(bloch_vector(&vec2(cr(1.0), cr(0.0)), &gens), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn affine_dims() {
        assert_eq!(affine_span_dim(&[vec![1.0, 2.0, 3.0]]).unwrap(), 0);
        let line = vec![vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0]];
        assert_eq!(affine_span_dim(&line).unwrap(), 1);
        assert_eq!(affine_span_dim(&[]), Err(Error::EmptyInput));
        assert_eq!(bloch_vectors(&corr(&extreme_xi())).affine_span_dim(), 3);
        assert!(bloch_vectors(&corr(&planar_xi())).affine_span_dim() <= 2);
    }

    #[test]
    fn maximal_extremality() {
        let (g, pi) = s3();
        let cert = is_maximally_extreme(&pdf_from_rep(&pi, &extreme_xi()).unwrap(), &g).unwrap();
        assert!(cert.extreme && cert.aqbc_violation && cert.non_real);
        assert_eq!((cert.rank, cert.span_dim), (2, 4));
        let z4 = FiniteGroup::build(&GroupDescriptor::Cyclic(4)).unwrap();
        let ch = PositiveDefiniteFunction::from_character(&z4.characters().unwrap()[1]);
        let cert = is_maximally_extreme(&ch, &z4).unwrap();
        assert_eq!(cert.rank, 1);
        assert!(!cert.aqbc_violation);
        let h = 0.5f64.sqrt();
        let real = pdf_from_rep(&pi, &vec2(cr(h), cr(h))).unwrap();
        let cert = is_maximally_extreme(&real, &g).unwrap();
        assert!(!cert.non_real && cert.rank_at_least_two);
        assert!(!cert.aqbc_violation);
    }

    #[test]
    fn dichotomy_examples() {
        assert_eq!(dichotomy_decompose(&corr(&extreme_xi())).unwrap(), Dichotomy::Extreme);
        let a = corr(&planar_xi());
        let Dichotomy::RandomUnitary { weights, .. } = dichotomy_decompose(&a).unwrap() else {
            panic!("expected a random unitary decomposition");
        };
        assert!((weights[0] + weights[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dichotomy_of_phase_flip() {
        let z2 = FiniteGroup::build(&GroupDescriptor::Cyclic(2)).unwrap();
        let p = 0.2;
        let phi = PositiveDefiniteFunction::new(&z2, vec![cr(1.0), cr(1.0 - 2.0 * p)]).unwrap();
        let a = correlation_matrix(&phi, &z2).unwrap();
        let Dichotomy::RandomUnitary { weights, unitaries } = dichotomy_decompose(&a).unwrap() else {
            panic!("expected a random unitary decomposition");
        };
        let mut w = weights.to_vec();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((w[0] - p).abs() < 1e-12 && (w[1] - (1.0 - p)).abs() < 1e-12);
        // up to phase: {I, Z}
        let z = diag(&[cr(1.0), cr(-1.0)]);
        for u in unitaries {
            let ph = u[(0, 0)];
            let v = u * ph.conj();
            assert!(spectral_norm(&(&v - identity(2))) < 1e-12 || spectral_norm(&(&v - &z)) < 1e-12);
        }
    }

    #[test]
    fn dichotomy_requires_rank_two() {
        let (g, _) = s3();
        let d = correlation_matrix(&PositiveDefiniteFunction::delta_e(&g), &g).unwrap();
        assert_eq!(dichotomy_decompose(&d), Err(Error::RankNotTwo(6)));
    }

    #[test]
    fn search_accepts_injected_example() {
        let (g, pi) = s3();
        let cfg = AqbcConfig { seed: 3, n_samples: 20, refine: false, injected: vec![extreme_xi()] };
        let rep = aqbc_search(&g, &pi, &cfg).unwrap();
        assert_eq!(rep.certificates[0].sample_index, 0);
        assert_eq!(rep.samples, 21);
        assert_eq!(rep.certificates.len() + rep.rejections.len(), 21);
    }

    #[test]
    fn search_rejects_real_and_abelian() {
        let (g, pi) = s3();
        let cfg = AqbcConfig { seed: 1, n_samples: 0, refine: false, injected: vec![vec2(cr(1.0), cr(1.0))] };
        let rep = aqbc_search(&g, &pi, &cfg).unwrap();
        assert_eq!(rep.rejections[0].reason, "real correlation matrix");
        let z4 = FiniteGroup::build(&GroupDescriptor::Cyclic(4)).unwrap();
        let chi = irrep_catalog(&z4).unwrap().remove(1);
        assert_eq!(aqbc_search(&z4, &chi, &cfg), Err(Error::RepresentationDimensionOne));
    }

    #[test]
    fn hull_of_unit_cube() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push([(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
        }
        assert!((hull_volume(&pts) - 1.0).abs() < 1e-12);
        let tet = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!((hull_volume(&tet) - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn export_formats() {
        let (g, _) = s3();
        let orbit = bloch_vectors(&corr(&extreme_xi()));
        let csv = export_bloch_orbit(&orbit, g.labels(), "s3", ExportFormat::Csv).unwrap();
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "label,v1,v2,v3");
        assert_eq!(rows.len(), 7);
        assert!(csv.contains("# affine_span_dim: 3"));
        let json = export_bloch_orbit(&orbit, g.labels(), "s3", ExportFormat::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 6);
        let z1 = FiniteGroup::build(&GroupDescriptor::Cyclic(1)).unwrap();
        let a = correlation_matrix(&PositiveDefiniteFunction::constant_one(&z1), &z1).unwrap();
        let o = bloch_vectors(&a);
        assert_eq!(o.vectors, vec![vec![0.0, 0.0, 1.0]]);
        let csv = export_bloch_orbit(&o, z1.labels(), "z1", ExportFormat::Csv).unwrap();
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 2);
    }
}
