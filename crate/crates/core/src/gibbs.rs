//! Data-augmented Gibbs sampler for `Y_t = B + E_t`,
//! `E_t ~ t_{n,n}(ν, 0, Σ1, Σ2)`.
//!
//! The likelihood is augmented with `W_t ~ IMG((ν+n−1)/2, 2, Σ1)` and
//! `Y_t | W_t ~ N(B, W_t, Σ2)`. Priors:
//!
//! * `vec(B) ~ N(0, Ω2 ⊗ Ω1)`
//! * `ν ~ Gamma(a_ν, b_ν)` truncated to `(1, ∞)`
//! * `Σ1 | γ ~ MG(δ1, β, (γΦ1)⁻¹)`, `Σ2 | γ ~ IMG(δ2, β, γΦ2)`
//! * `γ ~ Gamma(a_γ, b_γ)` (shape, scale)
//! * `β` fixed, Jeffreys (`∝ 1/β`) or inverse gamma.
//!
//! Each block has a `*_conditional` constructor returning the exact full
//! conditional as a distribution object (so its log-density can be checked
//! against the joint), and an `update_*` helper that draws from it.
//! `ν` is drawn from its collapsed conditional (the `W_t` integrated out),
//! which is why every sweep redraws all `W_t` right after `ν`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dists::{InvMatrixGamma, MatrixGamma, ScalarDist};
use crate::error::{Error, Result};
use crate::linalg::{spd_factor, spd_factor_jittered, Matrix, SpdFactor};
use crate::math::{exp, ln, sqrt};
use crate::rng::{derive_key, substream, ChainRng};
use crate::special::ln_mv_gamma;

/// `T` observed `n × n` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationSet {
    n: usize,
    ys: Vec<Matrix>,
}

impl ObservationSet {
    /// An empty sequence (`T = 0`) is accepted: every update then reduces to
    /// its prior, which is useful for calibration.
    pub fn new(n: usize, ys: Vec<Matrix>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("node count must be positive"));
        }
        for y in &ys {
            if y.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    expected: (n, n),
                    found: y.shape(),
                });
            }
            if !y.is_finite() {
                return Err(Error::domain("observations must be finite"));
            }
        }
        Ok(ObservationSet { n, ys })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.ys
    }

    /// Elementwise mean of the `Y_t`; zero for an empty sequence.
    pub fn mean(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for y in &self.ys {
            m.add_scaled(1.0, y);
        }
        if !self.ys.is_empty() {
            m.scale_mut(1.0 / self.ys.len() as f64);
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BetaMode {
    Fixed(f64),
    /// `f(β) ∝ 1/β`.
    Jeffreys,
    /// `f(β) ∝ β^{-(a+1)} exp(-1/(b β))`.
    InverseGamma { shape: f64, scale: f64 },
}

impl BetaMode {
    pub fn label(&self) -> &'static str {
        match self {
            BetaMode::Fixed(_) => "fixed",
            BetaMode::Jeffreys => "jeffreys",
            BetaMode::InverseGamma { .. } => "inverse_gamma",
        }
    }

    /// Log prior density of β up to a constant; `None` in fixed mode.
    pub fn ln_prior(&self, beta: f64) -> Option<f64> {
        match *self {
            BetaMode::Fixed(_) => None,
            BetaMode::Jeffreys => Some(-ln(beta)),
            BetaMode::InverseGamma { shape, scale } => Some(ScalarDist::InverseGamma { shape, scale }.ln_pdf(beta)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hyperparameters {
    pub omega1: Matrix,
    pub omega2: Matrix,
    pub phi1: Matrix,
    pub phi2: Matrix,
    pub delta1: f64,
    pub delta2: f64,
    pub a_gamma: f64,
    pub b_gamma: f64,
    pub a_nu: f64,
    pub b_nu: f64,
    pub beta_mode: BetaMode,
}

impl Hyperparameters {
    /// Identity scale matrices, `δ1 = δ2 = n`, `γ ~ Gamma(1, 1)`,
    /// `ν ~ Gamma(2, 5)` on `(1, ∞)`, `β ~ IG(3, 1)`.
    pub fn default_for(n: usize) -> Self {
        Hyperparameters {
            omega1: Matrix::identity(n),
            omega2: Matrix::identity(n),
            phi1: Matrix::identity(n),
            phi2: Matrix::identity(n),
            delta1: n as f64,
            delta2: n as f64,
            a_gamma: 1.0,
            b_gamma: 1.0,
            a_nu: 2.0,
            b_nu: 5.0,
            beta_mode: BetaMode::InverseGamma { shape: 3.0, scale: 1.0 },
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for (name, m) in [
            ("omega1", &self.omega1),
            ("omega2", &self.omega2),
            ("phi1", &self.phi1),
            ("phi2", &self.phi2),
        ] {
            if m.shape() != (n, n) {
                return Err(Error::domain(format!("{name} must be {n}x{n}, found {:?}", m.shape())));
            }
            if !m.is_symmetric(1e-10) || spd_factor(m).is_err() {
                return Err(Error::domain(format!("{name} must be symmetric positive definite")));
            }
        }
        let bound = (n as f64 - 1.0) / 2.0;
        for (name, d) in [("delta1", self.delta1), ("delta2", self.delta2)] {
            if !(d > bound) || !d.is_finite() {
                return Err(Error::domain(format!("{name} must exceed (n-1)/2 = {bound}, got {d}")));
            }
        }
        for (name, v) in [
            ("a_gamma", self.a_gamma),
            ("b_gamma", self.b_gamma),
            ("a_nu", self.a_nu),
            ("b_nu", self.b_nu),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        match self.beta_mode {
            BetaMode::Fixed(b) if !(b > 0.0) || !b.is_finite() => {
                Err(Error::domain(format!("fixed beta must be positive, got {b}")))
            }
            BetaMode::InverseGamma { shape, scale } if !(shape > 0.0 && scale > 0.0) => Err(Error::domain(
                format!("beta prior shape and scale must be positive, got ({shape}, {scale})"),
            )),
            _ => Ok(()),
        }
    }

    /// The truncated-gamma prior on ν.
    pub fn nu_prior(&self) -> ScalarDist {
        ScalarDist::TruncatedGamma {
            shape: self.a_nu,
            scale: self.b_nu,
            lower: 1.0,
        }
    }
}

/// One Gibbs state `(B, Σ1, Σ2, γ, ν, β, W_1..W_T)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    pub b: Matrix,
    pub sigma1: Matrix,
    pub sigma2: Matrix,
    pub gamma: f64,
    pub nu: f64,
    pub beta: f64,
    pub w: Vec<Matrix>,
}

impl ModelState {
    /// `ν > 1`, `γ, β > 0` and every SPD member factorizes.
    pub fn check_support(&self) -> Result<()> {
        if !(self.nu > 1.0 && self.nu.is_finite()) {
            return Err(Error::numerical(format!("nu left its support: {}", self.nu)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) || !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::numerical(format!(
                "gamma/beta left their support: {}, {}",
                self.gamma, self.beta
            )));
        }
        if !self.b.is_finite() {
            return Err(Error::numerical("B has non-finite entries"));
        }
        spd_factor(&self.sigma1)?;
        spd_factor(&self.sigma2)?;
        for w in &self.w {
            spd_factor(w)?;
        }
        Ok(())
    }
}

/// `B⁰ = mean Y_t`, `Σ1⁰ = Σ2⁰ = I`, `γ⁰ = a_γ b_γ`, `ν⁰ = max(2, a_ν b_ν)`,
/// `β⁰` the fixed value or 2, `W_t⁰ = I`.
pub fn init_state(obs: &ObservationSet, hyper: &Hyperparameters) -> ModelState {
    let n = obs.n();
    ModelState {
        b: obs.mean(),
        sigma1: Matrix::identity(n),
        sigma2: Matrix::identity(n),
        gamma: hyper.a_gamma * hyper.b_gamma,
        nu: (hyper.a_nu * hyper.b_nu).max(2.0),
        beta: match hyper.beta_mode {
            BetaMode::Fixed(b) => b,
            _ => 2.0,
        },
        w: vec![Matrix::identity(n); obs.len()],
    }
}

// ---------------------------------------------------------------- ν block

/// Number of points in the ν grid.
pub const NU_GRID_POINTS: usize = 400;

/// Collapsed conditional of ν:
/// `ν^{a−1} e^{−ν/b̄} [Γ_n((ν+2n−1)/2) / Γ_n((ν+n−1)/2)]^T` on `(1, ∞)`.
#[derive(Clone, Debug)]
pub struct NuConditional {
    n: usize,
    t: usize,
    shape: f64,
    /// `1/b̄ = 1/b_ν + ½ Σ_t ln|I + Σ1⁻¹ R_t Σ2⁻¹ R_tᵀ|`.
    inv_scale: f64,
}

impl NuConditional {
    pub fn inv_scale(&self) -> f64 {
        self.inv_scale
    }

    /// Unnormalized log-density; `-∞` outside `(1, ∞)`.
    pub fn ln_density(&self, nu: f64) -> f64 {
        if !(nu > 1.0) {
            return f64::NEG_INFINITY;
        }
        let nf = self.n as f64;
        let ratio = if self.t == 0 {
            0.0
        } else {
            // both arguments exceed (n−1)/2 for ν > 0
            ln_mv_gamma(self.n, (nu + 2.0 * nf - 1.0) / 2.0).unwrap_or(f64::NAN)
                - ln_mv_gamma(self.n, (nu + nf - 1.0) / 2.0).unwrap_or(f64::NAN)
        };
        (self.shape - 1.0) * ln(nu) - nu * self.inv_scale + self.t as f64 * ratio
    }

    /// Griddy inverse-CDF draw on `NU_GRID_POINTS` log-spaced points over
    /// `[1, ν_max]`, `ν_max = max(50, 10·current)`. The density is linear
    /// between grid points.
    pub fn sample<R: Rng + ?Sized>(&self, current: f64, rng: &mut R) -> Result<f64> {
        let nu_max = (10.0 * current).max(50.0);
        let last = (NU_GRID_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..NU_GRID_POINTS)
            .map(|k| exp(ln(nu_max) * k as f64 / last))
            .collect();
        // the density is evaluated at 1 by continuity from the right
        let logs: Vec<f64> = grid
            .iter()
            .map(|&g| self.ln_density(if g > 1.0 { g } else { 1.0 + 1e-12 }))
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::numerical(format!("nu conditional is not finite on the grid (max {top})")));
        }
        let dens: Vec<f64> = logs.iter().map(|&l| exp(l - top)).collect();
        let masses: Vec<f64> = (0..NU_GRID_POINTS - 1)
            .map(|k| 0.5 * (grid[k + 1] - grid[k]) * (dens[k] + dens[k + 1]))
            .collect();
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::numerical("nu grid mass vanished"));
        }
        let mut target = rng.random::<f64>() * total;
        let mut cell = masses.len() - 1;
        for (k, &m) in masses.iter().enumerate() {
            if target < m {
                cell = k;
                break;
            }
            target -= m;
        }
        let u = (target / masses[cell]).clamp(0.0, 1.0);
        let (f0, f1) = (dens[cell], dens[cell + 1]);
        // solve f0 s + (f1 − f0) s²/2 = u (f0 + f1)/2 for s in [0, 1]
        let root = sqrt(f0 * f0 + u * (f1 * f1 - f0 * f0));
        let s = if f0 + root > 0.0 { u * (f0 + f1) / (f0 + root) } else { u };
        let nu = grid[cell] + s.clamp(0.0, 1.0) * (grid[cell + 1] - grid[cell]);
        Ok(if nu > 1.0 { nu } else { 1.0 + f64::EPSILON })
    }
}

fn ln_det_kernel(resid: &Matrix, s1: &SpdFactor, s2: &SpdFactor) -> Result<f64> {
    // ln|Σ1 + R Σ2⁻¹ Rᵀ| − ln|Σ1|
    let g = s2.solve_lower(&resid.transpose())?;
    let mut inner = g.tr_matmul(&g);
    inner.add_scaled(1.0, &s1.reconstruct());
    Ok(spd_factor_jittered(&inner.symmetrize())?.log_det() - s1.log_det())
}

pub fn nu_conditional(state: &ModelState, obs: &ObservationSet, hyper: &Hyperparameters) -> Result<NuConditional> {
    let s1 = spd_factor_jittered(&state.sigma1)?;
    let s2 = spd_factor_jittered(&state.sigma2)?;
    let mut half_sum = 0.0;
    for y in obs.matrices() {
        half_sum += 0.5 * ln_det_kernel(&(y - &state.b), &s1, &s2)?;
    }
    Ok(NuConditional {
        n: obs.n(),
        t: obs.len(),
        shape: hyper.a_nu,
        inv_scale: 1.0 / hyper.b_nu + half_sum,
    })
}

pub fn update_nu<R: Rng + ?Sized>(
    state: &ModelState,
    obs: &ObservationSet,
    hyper: &Hyperparameters,
    rng: &mut R,
) -> Result<f64> {
    nu_conditional(state, obs, hyper)?.sample(state.nu, rng)
}

// ---------------------------------------------------------------- W block

/// `W_t | · ~ IMG((ν+2n−1)/2, 2, W̄_t)` with `W̄_t = R_t Σ2⁻¹ R_tᵀ + Σ1`,
/// `R_t = Y_t − B`.
pub fn w_conditional(state: &ModelState, obs: &ObservationSet, t: usize) -> Result<InvMatrixGamma> {
    let y = obs
        .matrices()
        .get(t)
        .ok_or_else(|| Error::domain(format!("slice index {t} out of range")))?;
    let s2 = spd_factor_jittered(&state.sigma2)?;
    w_conditional_with(state, y, &s2)
}

fn w_conditional_with(state: &ModelState, y: &Matrix, s2: &SpdFactor) -> Result<InvMatrixGamma> {
    let nf = y.nrows() as f64;
    let g = s2.solve_lower(&(y - &state.b).transpose())?;
    let mut wbar = g.tr_matmul(&g);
    wbar.add_scaled(1.0, &state.sigma1);
    let wbar = wbar.symmetrize();
    InvMatrixGamma::from_factor((state.nu + 2.0 * nf - 1.0) / 2.0, 2.0, spd_factor_jittered(&wbar)?)
}

pub fn update_w<R: Rng + ?Sized>(state: &ModelState, obs: &ObservationSet, t: usize, rng: &mut R) -> Result<Matrix> {
    Ok(w_conditional(state, obs, t)?.sample(rng))
}

// ---------------------------------------------------------------- B block

/// Gaussian on `vec(B)` in information form.
#[derive(Clone, Debug)]
pub struct VecNormal {
    n: usize,
    mean: Vec<f64>,
    precision: SpdFactor,
}

impl VecNormal {
    pub fn mean(&self) -> Matrix {
        Matrix::unvec(self.n, &self.mean).expect("length n²")
    }

    pub fn precision(&self) -> Matrix {
        self.precision.reconstruct()
    }

    pub fn ln_pdf(&self, b: &Matrix) -> Result<f64> {
        if b.shape() != (self.n, self.n) {
            return Err(Error::DimensionMismatch {
                expected: (self.n, self.n),
                found: b.shape(),
            });
        }
        let d: Vec<f64> = b.vec().iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        // quadratic form dᵀ P d = ‖Lᵀ d‖²
        let l = self.precision.lower();
        let k = d.len();
        let mut q = 0.0;
        for j in 0..k {
            let v: f64 = (j..k).map(|i| l[(i, j)] * d[i]).sum();
            q += v * v;
        }
        Ok(-0.5 * k as f64 * crate::special::LN_2PI + 0.5 * self.precision.log_det() - 0.5 * q)
    }

    /// `mean + L⁻ᵀ z` with `P = L Lᵀ`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix {
        let mut z: Vec<f64> = (0..self.mean.len()).map(|_| StandardNormal.sample(rng)).collect();
        self.precision.backward_in_place(&mut z);
        for (zi, m) in z.iter_mut().zip(&self.mean) {
            *zi += m;
        }
        Matrix::unvec(self.n, &z).expect("length n²")
    }
}

/// `vec(B) | · ~ N(P⁻¹ h, P⁻¹)` with
/// `P = Σ2⁻¹ ⊗ Σ_t W_t⁻¹ + Ω2⁻¹ ⊗ Ω1⁻¹` and `h = vec(Σ_t W_t⁻¹ Y_t Σ2⁻¹)`.
pub fn b_conditional(state: &ModelState, obs: &ObservationSet, hyper: &Hyperparameters) -> Result<VecNormal> {
    let n = obs.n();
    let s2_inv = spd_factor_jittered(&state.sigma2)?.inverse();
    let o1_inv = spd_factor(&hyper.omega1)?.inverse();
    let o2_inv = spd_factor(&hyper.omega2)?.inverse();
    let mut sw = Matrix::zeros(n, n);
    let mut lin = Matrix::zeros(n, n);
    for (y, w) in obs.matrices().iter().zip(&state.w) {
        let wf = spd_factor_jittered(w)?;
        sw.add_scaled(1.0, &wf.inverse());
        lin.add_scaled(1.0, &wf.solve(y)?);
    }
    let mut precision = s2_inv.kron(&sw);
    precision.add_scaled(1.0, &o2_inv.kron(&o1_inv));
    let precision = spd_factor_jittered(&precision.symmetrize())?;
    let h = lin.matmul(&s2_inv).vec();
    let mean = precision.solve_vec(&h);
    Ok(VecNormal { n, mean, precision })
}

pub fn update_b<R: Rng + ?Sized>(
    state: &ModelState,
    obs: &ObservationSet,
    hyper: &Hyperparameters,
    rng: &mut R,
) -> Result<Matrix> {
    Ok(b_conditional(state, obs, hyper)?.sample(rng))
}

// ---------------------------------------------------------------- Σ blocks

fn sum_w_inverse(state: &ModelState, n: usize) -> Result<Matrix> {
    let mut sw = Matrix::zeros(n, n);
    for w in &state.w {
        sw.add_scaled(1.0, &spd_factor_jittered(w)?.inverse());
    }
    Ok(sw)
}

/// `Σ1 | · ~ MG(δ1 + T(ν+n−1)/2, β, ((β/2) Σ_t W_t⁻¹ + γΦ1)⁻¹)`.
pub fn sigma1_conditional(state: &ModelState, hyper: &Hyperparameters) -> Result<MatrixGamma> {
    let n = hyper.phi1.nrows();
    let nf = n as f64;
    let mut a = sum_w_inverse(state, n)?.scale(state.beta / 2.0);
    a.add_scaled(state.gamma, &hyper.phi1);
    let phi_bar = spd_factor_jittered(&a.symmetrize())?.inverse();
    let shape = hyper.delta1 + state.w.len() as f64 * (state.nu + nf - 1.0) / 2.0;
    MatrixGamma::from_factor(shape, state.beta, spd_factor_jittered(&phi_bar)?)
}

pub fn update_sigma1<R: Rng + ?Sized>(state: &ModelState, hyper: &Hyperparameters, rng: &mut R) -> Result<Matrix> {
    Ok(sigma1_conditional(state, hyper)?.sample(rng))
}

/// `Σ2 | · ~ IMG(δ2 + Tn/2, β, (β/2) Σ_t R_tᵀ W_t⁻¹ R_t + γΦ2)`.
pub fn sigma2_conditional(state: &ModelState, obs: &ObservationSet, hyper: &Hyperparameters) -> Result<InvMatrixGamma> {
    let n = obs.n();
    let nf = n as f64;
    let mut s = Matrix::zeros(n, n);
    for (y, w) in obs.matrices().iter().zip(&state.w) {
        let g = spd_factor_jittered(w)?.solve_lower(&(&state.b - y))?;
        s.add_scaled(1.0, &g.tr_matmul(&g));
    }
    let mut psi = s.scale(state.beta / 2.0);
    psi.add_scaled(state.gamma, &hyper.phi2);
    InvMatrixGamma::from_factor(
        hyper.delta2 + obs.len() as f64 * nf / 2.0,
        state.beta,
        spd_factor_jittered(&psi.symmetrize())?,
    )
}

pub fn update_sigma2<R: Rng + ?Sized>(
    state: &ModelState,
    obs: &ObservationSet,
    hyper: &Hyperparameters,
    rng: &mut R,
) -> Result<Matrix> {
    Ok(sigma2_conditional(state, obs, hyper)?.sample(rng))
}

// ---------------------------------------------------------------- γ, β

/// `tr(Φ1 Σ1 + Φ2 Σ2⁻¹)`, shared by the γ and β conditionals.
pub fn prior_trace(state: &ModelState, hyper: &Hyperparameters) -> Result<f64> {
    let t1 = hyper.phi1.frobenius_dot(&state.sigma1);
    let t2 = spd_factor_jittered(&state.sigma2)?.trace_solve(&hyper.phi2)?;
    let tr = t1 + t2;
    if !(tr > 0.0) || !tr.is_finite() {
        return Err(Error::numerical(format!("prior trace must be positive, got {tr}")));
    }
    Ok(tr)
}

/// `γ | · ~ Gamma(a_γ + n(δ1+δ2), rate 1/b_γ + tr(Φ1Σ1 + Φ2Σ2⁻¹)/β)`.
pub fn gamma_conditional(state: &ModelState, hyper: &Hyperparameters) -> Result<ScalarDist> {
    let nf = hyper.phi1.nrows() as f64;
    let rate = 1.0 / hyper.b_gamma + prior_trace(state, hyper)? / state.beta;
    Ok(ScalarDist::Gamma {
        shape: hyper.a_gamma + nf * (hyper.delta1 + hyper.delta2),
        scale: 1.0 / rate,
    })
}

pub fn update_gamma<R: Rng + ?Sized>(state: &ModelState, hyper: &Hyperparameters, rng: &mut R) -> Result<f64> {
    gamma_conditional(state, hyper)?.sample(rng)
}

/// Inverse-gamma conditional of β, or `None` when β is fixed.
///
/// * inverse-gamma prior: shape `a_β + n(δ1+δ2)`, rate `1/b_β + γ·tr(·)`
/// * Jeffreys: shape `n(δ1+δ2)`, rate `γ·tr(·)`
pub fn beta_conditional(state: &ModelState, hyper: &Hyperparameters) -> Result<Option<ScalarDist>> {
    let nf = hyper.phi1.nrows() as f64;
    let base_shape = nf * (hyper.delta1 + hyper.delta2);
    let base_rate = state.gamma * prior_trace(state, hyper)?;
    Ok(match hyper.beta_mode {
        BetaMode::Fixed(_) => None,
        BetaMode::Jeffreys => Some(ScalarDist::inverse_gamma_rate(base_shape, base_rate)),
        BetaMode::InverseGamma { shape, scale } => {
            Some(ScalarDist::inverse_gamma_rate(shape + base_shape, 1.0 / scale + base_rate))
        }
    })
}

pub fn update_beta<R: Rng + ?Sized>(state: &ModelState, hyper: &Hyperparameters, rng: &mut R) -> Result<f64> {
    match (beta_conditional(state, hyper)?, hyper.beta_mode) {
        (None, BetaMode::Fixed(b)) => Ok(b),
        (Some(dist), _) => dist.sample(rng),
        (None, _) => unreachable!("only the fixed mode has no conditional"),
    }
}

// ---------------------------------------------------------------- chain

/// Block tags mixed into the per-draw RNG substream key.
pub mod block {
    pub const NU: u64 = 1;
    pub const W: u64 = 2;
    pub const B: u64 = 3;
    pub const SIGMA1: u64 = 4;
    pub const SIGMA2: u64 = 5;
    pub const GAMMA: u64 = 6;
    pub const BETA: u64 = 7;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GibbsConfig {
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig {
            sweeps: 2000,
            burn_in: 500,
            thin: 1,
            seed: 0,
        }
    }
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burn_in {
            return Err(Error::domain(format!(
                "sweeps ({}) must exceed burn_in ({})",
                self.sweeps, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::domain("thin must be at least 1"));
        }
        Ok(())
    }

    /// Seed of chain `k` in a multi-chain run.
    pub fn chain_seed(&self, chain: usize) -> u64 {
        if chain == 0 {
            self.seed
        } else {
            derive_key(self.seed, &[0xC4A1_u64, chain as u64])
        }
    }
}

/// One recorded draw.
#[derive(Clone, Debug, PartialEq)]
pub struct Draw {
    /// Zero-based sweep index.
    pub sweep: usize,
    pub b: Matrix,
    pub nu: f64,
    pub gamma: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainTrace {
    pub config: GibbsConfig,
    pub draws: Vec<Draw>,
    pub final_state: Option<ModelState>,
}

impl ChainTrace {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn nu_path(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.nu).collect()
    }

    pub fn gamma_path(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.gamma).collect()
    }

    pub fn beta_path(&self) -> Vec<f64> {
        self.draws.iter().map(|d| d.beta).collect()
    }
}

fn block_rng(seed: u64, sweep: usize, tag: u64, t: usize) -> ChainRng {
    substream(seed, &[sweep as u64, tag, t as u64])
}

fn at(sweep: usize, name: &'static str) -> impl FnOnce(Error) -> Error {
    move |e| Error::Sweep {
        sweep,
        block: name,
        source: alloc::boxed::Box::new(e),
    }
}

/// One full sweep `ν → W_1..W_T → B → Σ1 → Σ2 → γ → β`, in place.
pub fn sweep(state: &mut ModelState, obs: &ObservationSet, hyper: &Hyperparameters, seed: u64, index: usize) -> Result<()> {
    state.nu = update_nu(state, obs, hyper, &mut block_rng(seed, index, block::NU, 0)).map_err(at(index, "nu"))?;
    let s2 = spd_factor_jittered(&state.sigma2).map_err(at(index, "W"))?;
    let mut fresh = Vec::with_capacity(obs.len());
    for (t, y) in obs.matrices().iter().enumerate() {
        let dist = w_conditional_with(state, y, &s2).map_err(at(index, "W"))?;
        fresh.push(dist.sample(&mut block_rng(seed, index, block::W, t)));
    }
    state.w = fresh;
    state.b = update_b(state, obs, hyper, &mut block_rng(seed, index, block::B, 0)).map_err(at(index, "B"))?;
    state.sigma1 =
        update_sigma1(state, hyper, &mut block_rng(seed, index, block::SIGMA1, 0)).map_err(at(index, "Sigma1"))?;
    state.sigma2 =
        update_sigma2(state, obs, hyper, &mut block_rng(seed, index, block::SIGMA2, 0)).map_err(at(index, "Sigma2"))?;
    state.gamma =
        update_gamma(state, hyper, &mut block_rng(seed, index, block::GAMMA, 0)).map_err(at(index, "gamma"))?;
    state.beta = update_beta(state, hyper, &mut block_rng(seed, index, block::BETA, 0)).map_err(at(index, "beta"))?;
    Ok(())
}

/// Runs one chain from [`init_state`], keeping every `thin`-th draw after
/// `burn_in` sweeps.
pub fn run_chain(obs: &ObservationSet, hyper: &Hyperparameters, config: &GibbsConfig) -> Result<ChainTrace> {
    config.validate()?;
    hyper.validate(obs.n())?;
    let mut state = init_state(obs, hyper);
    run_chain_from(&mut state, obs, hyper, config)
}

/// As [`run_chain`] but starting from (and advancing) a supplied state.
pub fn run_chain_from(
    state: &mut ModelState,
    obs: &ObservationSet,
    hyper: &Hyperparameters,
    config: &GibbsConfig,
) -> Result<ChainTrace> {
    config.validate()?;
    let mut draws = Vec::with_capacity((config.sweeps - config.burn_in) / config.thin + 1);
    for i in 0..config.sweeps {
        sweep(state, obs, hyper, config.seed, i)?;
        if i >= config.burn_in && (i - config.burn_in).is_multiple_of(config.thin) {
            draws.push(Draw {
                sweep: i,
                b: state.b.clone(),
                nu: state.nu,
                gamma: state.gamma,
                beta: state.beta,
            });
        }
    }
    Ok(ChainTrace {
        config: *config,
        draws,
        final_state: Some(state.clone()),
    })
}

/// Elementwise average of the recorded `B` draws.
pub fn posterior_mean_b(trace: &ChainTrace) -> Result<Matrix> {
    posterior_mean_of(trace.draws.iter().map(|d| &d.b))
}

/// Elementwise average of a sequence of equally sized matrices.
pub fn posterior_mean_of<'a>(draws: impl IntoIterator<Item = &'a Matrix>) -> Result<Matrix> {
    let mut it = draws.into_iter();
    let first = it.next().ok_or(Error::EmptyInput("trace"))?;
    let mut sum = first.clone();
    let mut k = 1usize;
    for b in it {
        if b.shape() != sum.shape() {
            return Err(Error::DimensionMismatch {
                expected: sum.shape(),
                found: b.shape(),
            });
        }
        sum.add_scaled(1.0, b);
        k += 1;
    }
    sum.scale_mut(1.0 / k as f64);
    Ok(sum)
}
