//! Entropies, coherent information, the quantum capacity of Schur maps,
//! minimum output entropy estimates and entanglement-breaking tests.
//!
//! All logarithms are base 2.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{theta, QuantumChannel};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, ProbabilityMeasure};
use crate::linalg::{cr, hermitian_eigen, identity, log2_psd, spectral_norm, CMat, CVec, TOL};
use crate::rep::{gns, PositiveDefiniteFunction};
use crate::schur::{random_unit_vector, sample_rng};

/// Eigenvalues in [−1e-10, 0) are treated as zero; anything more negative is
/// not a state.
pub const CLIP_TOL: f64 = 1e-10;
const LOG_FLOOR: f64 = 1e-300;

fn entropy_of_values(vals: &[f64]) -> f64 {
    vals.iter()
        .filter(|&&l| l >= 1e-15)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of a matrix assumed to be a state (no validation).
pub fn entropy_unchecked(rho: &CMat) -> f64 {
    entropy_of_values(&hermitian_eigen(rho).0)
}

/// S(ρ) = −tr ρ log₂ ρ.
pub fn von_neumann_entropy(rho: &CMat) -> Result<f64> {
    if !rho.is_square() {
        return Err(Error::NotAState("matrix is not square".into()));
    }
    let herm = spectral_norm(&(rho - rho.adjoint()));
    if herm > CLIP_TOL {
        return Err(Error::NotAState(format!("not Hermitian (defect {herm:e})")));
    }
    let tr = rho.trace();
    if (tr - cr(1.0)).norm() > CLIP_TOL {
        return Err(Error::NotAState(format!("trace {tr}")));
    }
    let vals = hermitian_eigen(rho).0;
    if let Some(&min) = vals.last() {
        if min < -CLIP_TOL {
            return Err(Error::NotAState(format!("negative eigenvalue {min:e}")));
        }
    }
    Ok(entropy_of_values(&vals))
}

/// H(μ) = −Σ μ log₂ μ.
pub fn shannon_entropy(weights: &[f64]) -> f64 {
    weights.iter().filter(|&&w| w > 0.0).map(|&w| -w * w.log2()).sum::<f64>().max(0.0)
}

/// J(Φ, ρ) = S(Φ(ρ)) − S(Φᶜ(ρ)).
pub fn coherent_information(phi: &QuantumChannel, rho: &CMat) -> Result<f64> {
    if rho.nrows() != phi.dim_in() || rho.ncols() != phi.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "{}×{} state for a channel on dimension {}",
            rho.nrows(),
            rho.ncols(),
            phi.dim_in()
        )));
    }
    von_neumann_entropy(rho)?;
    Ok(entropy_unchecked(&phi.apply(rho)) - entropy_unchecked(&phi.complement().apply(rho)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub iterations: usize,
    pub gap: f64,
}

/// The capacity objective f(μ) = H(μ) − S(Σ μ(s) x_{π(s)ξ}) for a fixed orbit
/// of unit vectors π(s)ξ.
#[derive(Debug, Clone)]
pub struct CapacityObjective {
    states: Vec<CMat>,
    dim: usize,
}

impl CapacityObjective {
    /// Orbit π(s)ξ = π(s⁻¹)*ξ taken from the GNS factorization.
    pub fn new(phi: &PositiveDefiniteFunction, g: &FiniteGroup) -> Result<Self> {
        let res = gns(phi, g)?;
        let orbit: Vec<CVec> = g.elements().map(|s| res.translate(g.inv(s))).collect();
        Ok(Self::from_orbit(&orbit))
    }

    pub fn from_orbit(orbit: &[CVec]) -> Self {
        let dim = orbit.first().map_or(0, |v| v.len());
        Self { states: orbit.iter().map(|v| v * v.adjoint()).collect(), dim }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn mixture(&self, mu: &[f64]) -> CMat {
        let mut sigma = CMat::zeros(self.dim, self.dim);
        for (w, s) in mu.iter().zip(&self.states) {
            if *w != 0.0 {
                sigma += s * cr(*w);
            }
        }
        sigma
    }

    pub fn value(&self, mu: &[f64]) -> f64 {
        shannon_entropy(mu) - entropy_unchecked(&self.mixture(mu))
    }

    /// Value and gradient g_s = −log₂ μ_s + tr(ρ_s log₂ σ), up to a common
    /// constant.
    fn value_and_gradient(&self, mu: &[f64]) -> (f64, Vec<f64>) {
        let sigma = self.mixture(mu);
        let log_sigma = log2_psd(&sigma, LOG_FLOOR);
        let grad = mu
            .iter()
            .zip(&self.states)
            .map(|(&w, rho)| -(w.max(LOG_FLOOR)).log2() + crate::linalg::hs_inner(rho, &log_sigma).re)
            .collect();
        (shannon_entropy(mu) - entropy_unchecked(&sigma), grad)
    }

    fn kkt_gap(mu: &[f64], grad: &[f64]) -> f64 {
        let max = grad.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let avg: f64 = mu.iter().zip(grad).map(|(m, g)| m * g).sum();
        (max - avg).max(0.0)
    }

    /// Exponentiated-gradient ascent with backtracking from `start`.
    pub fn ascend(&self, start: &[f64], max_iter: usize, gap_tol: f64) -> CapacityResult {
        let mut mu = start.to_vec();
        let (mut f, mut grad) = self.value_and_gradient(&mu);
        let mut gap = Self::kkt_gap(&mu, &grad);
        let mut step = 1.0;
        let mut it = 0;
        while it < max_iter && gap >= gap_tol {
            it += 1;
            let gmax = grad.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut accepted = false;
            while step > 1e-14 {
                let mut cand: Vec<f64> = mu
                    .iter()
                    .zip(&grad)
                    .map(|(&m, &g)| m * (step * (g - gmax)).exp())
                    .collect();
                let total: f64 = cand.iter().sum();
                cand.iter_mut().for_each(|x| *x /= total);
                let (fc, gc) = self.value_and_gradient(&cand);
                let predicted: f64 = cand.iter().zip(&mu).zip(&grad).map(|((a, b), g)| (a - b) * g).sum();
                if fc - f >= 1e-4 * predicted - 1e-15 {
                    let f_old = f;
                    let moved = cand.iter().zip(&mu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    mu = cand;
                    f = fc;
                    grad = gc;
                    if fc - f_old >= 0.75 * predicted {
                        step = (step * 2.0).min(64.0);
                    }
                    accepted = moved > 0.0;
                    break;
                }
                step *= 0.5;
            }
            gap = Self::kkt_gap(&mu, &grad);
            if !accepted {
                break;
            }
        }
        CapacityResult { value: f, argmax: mu, iterations: it, gap }
    }
}

/// Restart schedule for the capacity optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityConfig {
    pub seed: u64,
    pub random_restarts: usize,
    pub max_iter: usize,
    pub gap_tol: f64,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self { seed: 0, random_restarts: 32, max_iter: 100_000, gap_tol: 1e-9 }
    }
}

/// Q(Θ̂(φ)) = max_μ H(μ) − S(Σ μ(s) x_{π(s)ξ}).
pub fn schur_capacity(phi: &PositiveDefiniteFunction, g: &FiniteGroup) -> Result<CapacityResult> {
    schur_capacity_with(phi, g, &CapacityConfig::default())
}

pub fn schur_capacity_with(
    phi: &PositiveDefiniteFunction,
    g: &FiniteGroup,
    config: &CapacityConfig,
) -> Result<CapacityResult> {
    let obj = CapacityObjective::new(phi, g)?;
    Ok(maximize(&obj, config))
}

/// Multi-start maximization; ties go to the earliest start.
pub fn maximize(obj: &CapacityObjective, config: &CapacityConfig) -> CapacityResult {
    let n = obj.len();
    let eps = 1e-3;
    let mut starts: Vec<Vec<f64>> = vec![vec![1.0 / n as f64; n]];
    for s in 0..n {
        let mut v = vec![eps / n as f64; n];
        v[s] += 1.0 - eps;
        starts.push(v);
    }
    for k in 0..config.random_restarts {
        let mut rng = sample_rng(config.seed, k);
        let v: Vec<f64> = (0..n).map(|_| -rand::Rng::random::<f64>(&mut rng).max(1e-300).ln()).collect();
        let total: f64 = v.iter().sum();
        starts.push(v.into_iter().map(|x| x / total).collect());
    }
    let results: Vec<CapacityResult> = starts
        .par_iter()
        .map(|s| obj.ascend(s, config.max_iter, config.gap_tol))
        .collect();
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value > results[best].value {
            best = i;
        }
    }
    let mut out = results[best].clone();
    out.value = obj.value(&out.argmax);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoeResult {
    /// Best output entropy found: an upper bound on the minimum.
    pub upper_bound: f64,
    pub witness: Vec<[f64; 2]>,
}

impl MoeResult {
    pub fn witness_vector(&self) -> CVec {
        CVec::from_iterator(self.witness.len(), self.witness.iter().map(|z| crate::linalg::c(z[0], z[1])))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoeConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Starting vectors tried in addition to the standard basis, the uniform
    /// vector and the random restarts.
    pub extra_starts: Vec<CVec>,
}

impl Default for MoeConfig {
    fn default() -> Self {
        Self { restarts: 64, seed: 0, max_iter: 500, extra_starts: Vec::new() }
    }
}

fn output_entropy(phi: &QuantumChannel, psi: &CVec) -> f64 {
    entropy_unchecked(&phi.apply(&(psi * psi.adjoint())))
}

fn descend(phi: &QuantumChannel, start: &CVec, max_iter: usize) -> (f64, CVec) {
    let mut psi = start / cr(start.norm());
    let mut f = output_entropy(phi, &psi);
    let mut step = 0.5;
    for _ in 0..max_iter {
        if f <= 1e-14 {
            break;
        }
        let sigma = phi.apply(&(&psi * psi.adjoint()));
        let dir = phi.apply_adjoint(&log2_psd(&sigma, 1e-30)) * &psi;
        let tangent = &dir - &psi * psi.dotc(&dir);
        let tn = tangent.norm();
        if tn < 1e-14 {
            break;
        }
        let tangent = tangent / cr(tn);
        let mut improved = false;
        while step > 1e-12 {
            let cand = &psi + &tangent * cr(step);
            let cand = &cand / cr(cand.norm());
            let fc = output_entropy(phi, &cand);
            if fc < f - 1e-15 {
                psi = cand;
                let gain = f - fc;
                f = fc;
                step = (step * 2.0).min(1.0);
                improved = gain > 1e-15;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (f, psi)
}

/// Multi-start projected descent of S(Φ(ψψ†)) over unit vectors ψ.
pub fn min_output_entropy(phi: &QuantumChannel, config: &MoeConfig) -> MoeResult {
    let d = phi.dim_in();
    let mut starts: Vec<CVec> = config.extra_starts.clone();
    for i in 0..d {
        let mut e = CVec::zeros(d);
        e[i] = cr(1.0);
        starts.push(e);
    }
    starts.push(CVec::from_element(d, cr(1.0 / (d as f64).sqrt())));
    for k in 0..config.restarts {
        starts.push(random_unit_vector(&mut sample_rng(config.seed, k), d));
    }
    let results: Vec<(f64, CVec)> = starts.par_iter().map(|s| descend(phi, s, config.max_iter)).collect();
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0 < results[best].0 {
            best = i;
        }
    }
    let (f, psi) = &results[best];
    MoeResult { upper_bound: *f, witness: psi.iter().map(|z| [z.re, z.im]).collect() }
}

/// S_min(Θ(μ)∘Θ̂(δ_e)) = H(μ).
pub fn moe_theta_restricted(mu: &ProbabilityMeasure) -> f64 {
    shannon_entropy(mu.weights())
}

/// S_min(Θ̂(φ)∘Θ(h)) = S(C_φ/|G|).
pub fn moe_theta_hat_restricted(phi: &PositiveDefiniteFunction, g: &FiniteGroup) -> f64 {
    entropy_unchecked(&(phi.gram(g) * cr(1.0 / g.order() as f64)))
}

/// Minimum of S(Θ(μ)(ρ)) over diagonal states, which are mapped to diagonal
/// states; the minimum is attained at a vertex δ_s.
pub fn theta_min_over_diagonal(mu: &ProbabilityMeasure, g: &FiniteGroup) -> Result<f64> {
    let ch = theta(mu, g)?;
    let n = g.order();
    Ok((0..n)
        .map(|s| entropy_unchecked(&ch.apply(&crate::linalg::matrix_unit(n, s, s))))
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PptReport {
    pub verdict: bool,
    pub min_pt_eigenvalue: f64,
}

/// PPT test of the Choi matrix (partial transpose on the output factor).
pub fn choi_ppt(phi: &QuantumChannel) -> PptReport {
    let pt = phi.choi().partial_transpose_output();
    let min = hermitian_eigen(&pt).0.last().cloned().unwrap_or(0.0);
    PptReport { verdict: min >= -TOL, min_pt_eigenvalue: min }
}

/// Which channel family an entanglement-breaking query is about.
#[derive(Debug, Clone)]
pub enum EbInput<'a> {
    ThetaHat(&'a PositiveDefiniteFunction),
    Theta(&'a ProbabilityMeasure),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EbReport {
    pub entanglement_breaking: bool,
    pub reason: String,
    /// Negative eigenvalue of the partially transposed Choi matrix, if any.
    pub ppt_witness: Option<f64>,
}

/// Entanglement breaking iff φ = δ_e (for Θ̂) or G abelian and μ uniform (for Θ).
pub fn eb_test(input: EbInput<'_>, g: &FiniteGroup) -> Result<EbReport> {
    let (eb, reason, ch) = match input {
        EbInput::ThetaHat(phi) => {
            let delta = PositiveDefiniteFunction::delta_e(g);
            let dev = phi
                .values()
                .iter()
                .zip(delta.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            let eb = dev <= 1e-12;
            let reason = if eb { "φ = δ_e".to_string() } else { "φ ≠ δ_e".to_string() };
            (eb, reason, crate::channel::theta_hat(phi, g)?)
        }
        EbInput::Theta(mu) => {
            let ch = theta(mu, g)?;
            if !g.is_abelian() {
                (false, "nonabelian group".to_string(), ch)
            } else {
                let dev = mu.max_abs_diff(&ProbabilityMeasure::haar(g));
                if dev <= 1e-12 {
                    (true, "abelian group with Haar measure".to_string(), ch)
                } else {
                    (false, "measure is not Haar".to_string(), ch)
                }
            }
        }
    };
    let ppt = choi_ppt(&ch);
    let ppt_witness = (!eb && !ppt.verdict).then_some(ppt.min_pt_eigenvalue);
    Ok(EbReport { entanglement_breaking: eb, reason, ppt_witness })
}

/// S(Φ(ρ)) − S(ρ); non-negative for unital channels.
pub fn entropy_gain(phi: &QuantumChannel, rho: &CMat) -> Result<f64> {
    Ok(von_neumann_entropy(&phi.apply(rho))? - von_neumann_entropy(rho)?)
}

/// Maximally mixed state I/d.
pub fn maximally_mixed(d: usize) -> CMat {
    identity(d) * cr(1.0 / d as f64)
}
