//! Quantum channels as Kraus families, their Choi matrices, and the
//! constructors for `Θ(μ)`, `Θ̂(φ)`, conditional expectations and
//! Weyl-covariant channels.
//!
//! Channels act in the Schrödinger picture: `Φ(ρ) = Σ aᵢ ρ aᵢ†`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, ProbabilityMeasure};
use crate::linalg::{
    cr, diag, hermitian_eigen, identity, kron, matrix_unit, numerical_rank, spectral_norm, unvec, CMat, CVec,
    C64, RANK_TOL, TOL,
};
use crate::rep::{dual_group, fourier_matrix, fourier_of_measure, gns, right_regular, PositiveDefiniteFunction};

/// Kraus operators whose weight ‖a‖²_F is below this are dropped.
pub const KRAUS_DROP: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMat>,
}

/// Residuals of the two Kraus sums against the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BistochasticReport {
    pub unital_residual: f64,
    pub tp_residual: f64,
    pub verdict: bool,
}

/// Unnormalized Choi matrix J = Σ E_st ⊗ Φ(E_st), input factor first.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub matrix: CMat,
    pub dim_in: usize,
    pub dim_out: usize,
}

/// Range of a conditional expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectationTarget {
    /// Diagonal matrices.
    Diagonal,
    /// The span of the left translations l_s.
    GroupAlgebra,
}

impl QuantumChannel {
    /// Builds a channel, dropping negligible operators and checking trace
    /// preservation within `1e-10`.
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let ch = Self::from_kraus_unchecked(kraus)?;
        let r = ch.tp_residual();
        if r > TOL {
            return Err(Error::NotTracePreserving(r));
        }
        Ok(ch)
    }

    /// Shape checks only.
    pub fn from_kraus_unchecked(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::EmptyInput)?;
        let (dim_out, dim_in) = first.shape();
        if kraus.iter().any(|a| a.shape() != (dim_out, dim_in)) {
            return Err(Error::DimensionMismatch("Kraus operators of different shapes".into()));
        }
        let kept: Vec<CMat> = kraus
            .into_iter()
            .filter(|a| a.iter().map(|z| z.norm_sqr()).sum::<f64>() >= KRAUS_DROP)
            .collect();
        let kraus = if kept.is_empty() { vec![CMat::zeros(dim_out, dim_in)] } else { kept };
        Ok(Self { dim_in, dim_out, kraus })
    }

    pub fn identity(d: usize) -> Self {
        Self { dim_in: d, dim_out: d, kraus: vec![identity(d)] }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for a in &self.kraus {
            out += a * rho * a.adjoint();
        }
        out
    }

    /// Heisenberg-picture action Φ†(x) = Σ aᵢ† x aᵢ.
    pub fn apply_adjoint(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_in, self.dim_in);
        for a in &self.kraus {
            out += a.adjoint() * x * a;
        }
        out
    }

    /// Matrix of the map on column-stacked vectors: Σ conj(aᵢ) ⊗ aᵢ.
    pub fn superoperator(&self) -> CMat {
        let mut s = CMat::zeros(self.dim_out * self.dim_out, self.dim_in * self.dim_in);
        for a in &self.kraus {
            s += kron(&a.conjugate(), a);
        }
        s
    }

    pub fn tp_residual(&self) -> f64 {
        let mut sum = CMat::zeros(self.dim_in, self.dim_in);
        for a in &self.kraus {
            sum += a.adjoint() * a;
        }
        spectral_norm(&(sum - identity(self.dim_in)))
    }

    pub fn unital_residual(&self) -> f64 {
        let mut sum = CMat::zeros(self.dim_out, self.dim_out);
        for a in &self.kraus {
            sum += a * a.adjoint();
        }
        spectral_norm(&(sum - identity(self.dim_out)))
    }

    pub fn is_bistochastic(&self) -> BistochasticReport {
        let unital_residual = if self.dim_in == self.dim_out { self.unital_residual() } else { f64::INFINITY };
        let tp_residual = self.tp_residual();
        BistochasticReport {
            unital_residual,
            tp_residual,
            verdict: unital_residual.max(tp_residual) <= TOL,
        }
    }

    pub fn choi(&self) -> ChoiMatrix {
        let (di, d) = (self.dim_in, self.dim_out);
        let mut j = CMat::zeros(di * d, di * d);
        for a in &self.kraus {
            // column vector Σ_s e_s ⊗ a e_s
            let v = CVec::from_iterator(di * d, (0..di).flat_map(|s| (0..d).map(move |k| a[(k, s)])));
            j += &v * v.adjoint();
        }
        ChoiMatrix { matrix: j, dim_in: di, dim_out: d }
    }

    pub fn choi_rank(&self) -> usize {
        numerical_rank(&self.choi().matrix, RANK_TOL)
    }

    /// Kraus family of minimal length from the Choi eigendecomposition.
    pub fn minimal_kraus(&self) -> Vec<CMat> {
        let ch = self.choi();
        let (vals, vecs) = hermitian_eigen(&ch.matrix);
        let top = vals.first().cloned().unwrap_or(0.0).max(0.0);
        vals.iter()
            .enumerate()
            .filter(|(_, &l)| l > RANK_TOL * top && l > 0.0)
            .map(|(i, &l)| unvec(&(vecs.column(i) * cr(l.sqrt())), self.dim_out, self.dim_in))
            .collect()
    }

    /// Returns U when Φ = U(·)U†. The phase is fixed so that the first
    /// largest-modulus entry of U is real positive.
    pub fn is_unitary_conjugation(&self) -> Option<CMat> {
        if self.dim_in != self.dim_out {
            return None;
        }
        let ks = self.minimal_kraus();
        if ks.len() != 1 {
            return None;
        }
        let mut u = ks.into_iter().next().unwrap();
        let mut best = (0usize, 0.0f64);
        for (i, z) in u.iter().enumerate() {
            if z.norm() > best.1 + 1e-12 {
                best = (i, z.norm());
            }
        }
        let z = u.as_slice()[best.0];
        if z.norm() == 0.0 {
            return None;
        }
        u *= z.conj() / cr(z.norm());
        let d = self.dim_in;
        if spectral_norm(&(&u * u.adjoint() - identity(d))) > TOL {
            return None;
        }
        let conj = QuantumChannel { dim_in: d, dim_out: d, kraus: vec![u.clone()] };
        (channel_distance(self, &conj).ok()? <= TOL).then_some(u)
    }

    /// Φ∘Ψ with Kraus family {aᵢ bⱼ}.
    pub fn compose(&self, psi: &Self) -> Result<Self> {
        if psi.dim_out != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose a {}-input channel after a {}-output channel",
                self.dim_in, psi.dim_out
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * psi.kraus.len());
        for a in &self.kraus {
            for b in &psi.kraus {
                kraus.push(a * b);
            }
        }
        Self::from_kraus_unchecked(kraus)
    }

    /// Φ⊗Ψ with Kraus family {aᵢ ⊗ bⱼ}.
    pub fn tensor(&self, psi: &Self) -> Self {
        let mut kraus = Vec::with_capacity(self.kraus.len() * psi.kraus.len());
        for a in &self.kraus {
            for b in &psi.kraus {
                kraus.push(kron(a, b));
            }
        }
        Self { dim_in: self.dim_in * psi.dim_in, dim_out: self.dim_out * psi.dim_out, kraus }
    }

    /// Complementary channel with [b_j]_{ik} = [a_i]_{jk}.
    pub fn complement(&self) -> Self {
        let n = self.kraus.len();
        let kraus = (0..self.dim_out)
            .map(|j| CMat::from_fn(n, self.dim_in, |i, k| self.kraus[i][(j, k)]))
            .collect();
        Self { dim_in: self.dim_in, dim_out: n, kraus }
    }
}

impl ChoiMatrix {
    /// tr over the output factor.
    pub fn partial_trace_output(&self) -> CMat {
        let (di, d) = (self.dim_in, self.dim_out);
        CMat::from_fn(di, di, |s, t| (0..d).map(|k| self.matrix[(s * d + k, t * d + k)]).sum())
    }

    /// Partial transpose on the output factor.
    pub fn partial_transpose_output(&self) -> CMat {
        let (di, d) = (self.dim_in, self.dim_out);
        let mut out = CMat::zeros(di * d, di * d);
        for s in 0..di {
            for t in 0..di {
                for k in 0..d {
                    for l in 0..d {
                        out[(s * d + k, t * d + l)] = self.matrix[(s * d + l, t * d + k)];
                    }
                }
            }
        }
        out
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }
}

/// max over matrix units E_st of ‖Φ(E_st) − Ψ(E_st)‖.
pub fn channel_distance(phi: &QuantumChannel, psi: &QuantumChannel) -> Result<f64> {
    if phi.dim_in != psi.dim_in || phi.dim_out != psi.dim_out {
        return Err(Error::DimensionMismatch("channels of different shapes".into()));
    }
    let d = phi.dim_in;
    Ok((0..d * d)
        .into_par_iter()
        .map(|k| {
            let e = matrix_unit(d, k / d, k % d);
            spectral_norm(&(phi.apply(&e) - psi.apply(&e)))
        })
        .reduce(|| 0.0, f64::max))
}

fn check_measure(mu: &ProbabilityMeasure, g: &FiniteGroup) -> Result<()> {
    if mu.len() != g.order() {
        return Err(Error::DimensionMismatch(format!(
            "measure of length {} on a group of order {}",
            mu.len(),
            g.order()
        )));
    }
    Ok(())
}

fn check_pdf(phi: &PositiveDefiniteFunction, g: &FiniteGroup) -> Result<()> {
    if phi.len() != g.order() {
        return Err(Error::DimensionMismatch(format!(
            "function of length {} on a group of order {}",
            phi.len(),
            g.order()
        )));
    }
    Ok(())
}

/// Θ(μ): Kraus operators √μ(s)·r_s.
pub fn theta(mu: &ProbabilityMeasure, g: &FiniteGroup) -> Result<QuantumChannel> {
    check_measure(mu, g)?;
    let kraus = g
        .elements()
        .filter(|&s| mu.weights()[s] >= KRAUS_DROP)
        .map(|s| right_regular(g, s) * cr(mu.weights()[s].sqrt()))
        .collect();
    QuantumChannel::from_kraus_unchecked(kraus)
}

/// Θ̂(φ): Schur multiplication by C_φ, with diagonal Kraus operators built
/// from the columns of the GNS factor.
pub fn theta_hat(phi: &PositiveDefiniteFunction, g: &FiniteGroup) -> Result<QuantumChannel> {
    check_pdf(phi, g)?;
    let res = gns(phi, g)?;
    let kraus = (0..res.rank)
        .map(|k| diag(&res.factor.column(k).iter().cloned().collect::<Vec<C64>>()))
        .collect();
    QuantumChannel::from_kraus_unchecked(kraus)
}

/// Projection onto diagonal matrices (Θ̂(δ_e)) or onto the group algebra (Θ(h)).
pub fn conditional_expectation(g: &FiniteGroup, target: ExpectationTarget) -> Result<QuantumChannel> {
    match target {
        ExpectationTarget::Diagonal => theta_hat(&PositiveDefiniteFunction::delta_e(g), g),
        ExpectationTarget::GroupAlgebra => theta(&ProbabilityMeasure::haar(g), g),
    }
}

/// Multiplication operator M_χ = diag(χ(u)).
pub fn multiplication_operator(values: &[C64]) -> CMat {
    diag(values)
}

/// Weyl-covariant channel on Z_d: Kraus √q(s,t)·r_s·M_{χᵗ}, where q is indexed
/// by `s·d + t` on Z_d × Z_d.
pub fn weyl_covariant(q: &ProbabilityMeasure, d: usize) -> Result<QuantumChannel> {
    if q.len() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "weight vector of length {} is not on Z_{d} × Z_{d}",
            q.len()
        )));
    }
    let zd = FiniteGroup::build(&crate::group::GroupDescriptor::Cyclic(d))?;
    let chars = zd.characters()?;
    let mut kraus = Vec::new();
    for s in 0..d {
        let r = right_regular(&zd, s);
        for (t, ch) in chars.iter().enumerate() {
            let w = q.weights()[s * d + t];
            if w >= KRAUS_DROP {
                kraus.push(&r * multiplication_operator(&ch.values) * cr(w.sqrt()));
            }
        }
    }
    QuantumChannel::from_kraus_unchecked(kraus)
}

/// Residual of the Fourier equivalence F̄·Θ(μ)(Fᵀ x F̄)·Fᵀ = Θ̂(μ̂)(x), maximized
/// over matrix units x. For cyclic-factor orderings F is symmetric and this is
/// F†·Θ(μ)(F x F†)·F.
pub fn duality_check(mu: &ProbabilityMeasure, g: &FiniteGroup) -> Result<f64> {
    check_measure(mu, g)?;
    let f = fourier_matrix(g)?;
    let fbar = f.conjugate();
    let ft = f.transpose();
    let th = theta(mu, g)?;
    let dual = dual_group(g)?;
    let hat = fourier_of_measure(mu, g)?;
    let c_hat = hat.gram(&dual);
    let n = g.order();
    Ok((0..n * n)
        .into_par_iter()
        .map(|k| {
            let x = matrix_unit(n, k / n, k % n);
            let lhs = &fbar * th.apply(&(&ft * &x * &fbar)) * &ft;
            let rhs = c_hat.component_mul(&x);
            spectral_norm(&(lhs - rhs))
        })
        .reduce(|| 0.0, f64::max))
}

/// Dimension of span{diagonal matrices} ∩ span{l_s}.
pub fn diagonal_group_algebra_intersection_dim(g: &FiniteGroup) -> usize {
    let n = g.order();
    let mut cols: Vec<CVec> = Vec::new();
    for i in 0..n {
        cols.push(crate::linalg::vec_of(&matrix_unit(n, i, i)));
    }
    let (l, _) = crate::rep::regular_reps(g);
    for s in g.elements() {
        cols.push(crate::linalg::vec_of(l.matrix(s)));
    }
    let a = CMat::from_columns(&cols[..n]);
    let b = CMat::from_columns(&cols[n..]);
    let ab = CMat::from_columns(&cols);
    numerical_rank(&a, RANK_TOL) + numerical_rank(&b, RANK_TOL) - numerical_rank(&ab, RANK_TOL)
}
