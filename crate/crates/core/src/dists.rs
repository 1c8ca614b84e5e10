//! Matrix-variate and scalar distributions used by the model.
//!
//! # Parameterization
//!
//! The matrix gamma and inverted matrix gamma families use different roles
//! for their matrix argument, fixed once here:
//!
//! * [`MatrixGamma`] `MG(δ, β, Φ)` has density
//!   `|Φ|^{-δ} β^{-nδ} Γ_n(δ)^{-1} |S|^{δ-(n+1)/2} etr(-Φ⁻¹S/β)`,
//!   so `Φ` enters the trace *inverted*. It equals `Wishart(2δ, (β/2)Φ)`.
//! * [`InvMatrixGamma`] `IMG(δ, β, Ψ)` has density
//!   `|Ψ|^{δ} β^{-nδ} Γ_n(δ)^{-1} |S|^{-(δ+(n+1)/2)} etr(-ΨS⁻¹/β)`,
//!   so `Ψ` enters the trace *directly*. `S ~ IMG(δ, β, Ψ)` iff
//!   `S⁻¹ ~ MG(δ, β, Ψ⁻¹)`, i.e. `S ~ InvWishart(2δ, (2/β)Ψ)`.
//!
//! With these conventions the priors on the two scale matrices, the
//! normal / inverted-gamma mixture representation of the matrix t, and all
//! Gibbs full conditionals are simultaneously exact.
//!
//! All densities are returned on the log scale.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{spd_factor, Matrix, SpdFactor};
use crate::math::{ln, sqrt};
use crate::special::{gamma_p, gamma_p_inv, gamma_q, gamma_q_inv, ln_gamma, ln_mv_gamma, LN_2PI, LN_PI};

fn check_square(m: &Matrix, n: usize) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: (n, n),
            found: m.shape(),
        });
    }
    Ok(())
}

fn check_shape_param(shape: f64, n: usize) -> Result<()> {
    let bound = (n as f64 - 1.0) / 2.0;
    if !(shape > bound) || !shape.is_finite() {
        return Err(Error::domain(alloc::format!(
            "shape must exceed (n-1)/2 = {bound}, got {shape}"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain(alloc::format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn standard_normal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    Matrix::from_col_major(rows, cols, data).expect("length matches")
}

/// Lower-triangular Bartlett factor `T` with `T_ii² ~ Gamma(shape − i/2, 2)`
/// (0-based `i`) and standard normal entries below the diagonal, so that
/// `T Tᵀ ~ Wishart(2·shape, I)`. Fractional `2·shape` is allowed.
fn bartlett_factor<R: Rng + ?Sized>(n: usize, shape: f64, rng: &mut R) -> Matrix {
    let mut t = Matrix::zeros(n, n);
    for i in 0..n {
        let g = Gamma::new(shape - i as f64 / 2.0, 2.0).expect("shape checked by caller");
        t[(i, i)] = sqrt(g.sample(rng));
        for j in 0..i {
            t[(i, j)] = StandardNormal.sample(rng);
        }
    }
    t
}

/// Inverse of a lower-triangular matrix with nonzero diagonal.
fn lower_tri_inverse(t: &Matrix) -> Matrix {
    let n = t.nrows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = 1.0 / t[(j, j)];
        for i in j + 1..n {
            let mut s = 0.0;
            for k in j..i {
                s += t[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / t[(i, i)];
        }
    }
    inv
}

/// Matrix normal `N_{p,q}(M, U, V)`: `vec(X) ~ N(vec(M), V ⊗ U)`.
#[derive(Clone, Debug)]
pub struct MatrixNormal {
    mean: Matrix,
    row: SpdFactor,
    col: SpdFactor,
}

impl MatrixNormal {
    pub fn new(mean: Matrix, row_scale: &Matrix, col_scale: &Matrix) -> Result<Self> {
        let row = spd_factor(row_scale)?;
        let col = spd_factor(col_scale)?;
        Self::from_factors(mean, row, col)
    }

    pub fn from_factors(mean: Matrix, row: SpdFactor, col: SpdFactor) -> Result<Self> {
        if mean.shape() != (row.dim(), col.dim()) {
            return Err(Error::DimensionMismatch {
                expected: (row.dim(), col.dim()),
                found: mean.shape(),
            });
        }
        Ok(MatrixNormal { mean, row, col })
    }

    pub fn mean(&self) -> &Matrix {
        &self.mean
    }

    pub fn ln_pdf(&self, x: &Matrix) -> Result<f64> {
        if x.shape() != self.mean.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.shape(),
                found: x.shape(),
            });
        }
        let (p, q) = self.mean.shape();
        let d = x - &self.mean;
        // tr(V⁻¹ Dᵀ U⁻¹ D) = ‖L_U⁻¹ D L_V⁻ᵀ‖²_F
        let c = self.row.solve_lower(&d)?;
        let k = self.col.solve_lower(&c.transpose())?;
        let quad = k.frobenius_dot(&k);
        Ok(-0.5 * (p * q) as f64 * LN_2PI
            - 0.5 * q as f64 * self.row.log_det()
            - 0.5 * p as f64 * self.col.log_det()
            - 0.5 * quad)
    }

    /// `M + L_U Z L_Vᵀ` with `Z` iid standard normal (filled column-major).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix {
        let (p, q) = self.mean.shape();
        let z = standard_normal_matrix(p, q, rng);
        let mut x = self.row.lower().matmul(&z).matmul(&self.col.lower().transpose());
        x.add_scaled(1.0, &self.mean);
        x
    }
}

/// Matrix gamma `MG(δ, β, Φ)`; see the module docs for the density.
#[derive(Clone, Debug)]
pub struct MatrixGamma {
    shape: f64,
    scale: f64,
    phi: SpdFactor,
}

impl MatrixGamma {
    pub fn new(shape: f64, scale: f64, phi: &Matrix) -> Result<Self> {
        Self::from_factor(shape, scale, spd_factor(phi)?)
    }

    pub fn from_factor(shape: f64, scale: f64, phi: SpdFactor) -> Result<Self> {
        check_shape_param(shape, phi.dim())?;
        check_positive("scale", scale)?;
        Ok(MatrixGamma { shape, scale, phi })
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn phi(&self) -> Matrix {
        self.phi.reconstruct()
    }

    /// `E[S] = δ β Φ`.
    pub fn mean(&self) -> Matrix {
        self.phi.reconstruct().scale(self.shape * self.scale)
    }

    pub fn ln_pdf(&self, s: &Matrix) -> Result<f64> {
        let n = self.dim();
        check_square(s, n)?;
        let sf = spd_factor(s)?;
        let nf = n as f64;
        let tr = self.phi.trace_solve(s)?;
        Ok(-self.shape * self.phi.log_det() - nf * self.shape * ln(self.scale)
            - ln_mv_gamma(n, self.shape)?
            + (self.shape - (nf + 1.0) / 2.0) * sf.log_det()
            - tr / self.scale)
    }

    /// Bartlett construction `(β/2) L_Φ T Tᵀ L_Φᵀ`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix {
        let t = bartlett_factor(self.dim(), self.shape, rng);
        let a = self.phi.lower().matmul(&t);
        a.matmul(&a.transpose()).scale(self.scale / 2.0).symmetrize()
    }
}

/// Inverted matrix gamma `IMG(δ, β, Ψ)`; see the module docs for the density.
#[derive(Clone, Debug)]
pub struct InvMatrixGamma {
    shape: f64,
    scale: f64,
    psi: Matrix,
    psi_factor: SpdFactor,
}

impl InvMatrixGamma {
    pub fn new(shape: f64, scale: f64, psi: &Matrix) -> Result<Self> {
        Self::from_factor(shape, scale, spd_factor(psi)?)
    }

    pub fn from_factor(shape: f64, scale: f64, psi_factor: SpdFactor) -> Result<Self> {
        check_shape_param(shape, psi_factor.dim())?;
        check_positive("scale", scale)?;
        Ok(InvMatrixGamma {
            shape,
            scale,
            psi: psi_factor.reconstruct(),
            psi_factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.psi.nrows()
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn psi(&self) -> &Matrix {
        &self.psi
    }

    /// `E[S] = (2/β) Ψ / (2δ − n − 1)`, defined for `2δ > n + 1`.
    pub fn mean(&self) -> Option<Matrix> {
        let denom = 2.0 * self.shape - self.dim() as f64 - 1.0;
        (denom > 0.0).then(|| self.psi.scale(2.0 / (self.scale * denom)))
    }

    pub fn ln_pdf(&self, s: &Matrix) -> Result<f64> {
        let n = self.dim();
        check_square(s, n)?;
        let sf = spd_factor(s)?;
        let nf = n as f64;
        let tr = sf.trace_solve(&self.psi)?;
        Ok(self.shape * self.psi_factor.log_det() - nf * self.shape * ln(self.scale)
            - ln_mv_gamma(n, self.shape)?
            - (self.shape + (nf + 1.0) / 2.0) * sf.log_det()
            - tr / self.scale)
    }

    /// Draws `G ~ MG(δ, β, Ψ⁻¹)` and returns `G⁻¹`.
    ///
    /// With `L_Ψ⁻ᵀ` as the square root of `Ψ⁻¹`, `G⁻¹ = (2/β) X Xᵀ` where
    /// `X = L_Ψ T⁻ᵀ`, so no dense inverse is needed.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix {
        let t = bartlett_factor(self.dim(), self.shape, rng);
        let x = self.psi_factor.lower().matmul(&lower_tri_inverse(&t).transpose());
        x.matmul(&x.transpose()).scale(2.0 / self.scale).symmetrize()
    }
}

/// Matrix variate t `t_{n,n}(ν, B, Σ1, Σ2)`.
#[derive(Clone, Debug)]
pub struct MatrixT {
    dof: f64,
    mean: Matrix,
    sigma1: Matrix,
    sigma1_factor: SpdFactor,
    sigma2_factor: SpdFactor,
}

impl MatrixT {
    pub fn new(dof: f64, mean: Matrix, sigma1: &Matrix, sigma2: &Matrix) -> Result<Self> {
        check_positive("degrees of freedom", dof)?;
        let n = mean.nrows();
        check_square(&mean, n)?;
        check_square(sigma1, n)?;
        check_square(sigma2, n)?;
        Ok(MatrixT {
            dof,
            sigma1_factor: spd_factor(sigma1)?,
            sigma2_factor: spd_factor(sigma2)?,
            sigma1: sigma1.clone(),
            mean,
        })
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn dim(&self) -> usize {
        self.mean.nrows()
    }

    /// `ln|I + Σ1⁻¹ D Σ2⁻¹ Dᵀ|` for `D = X − B`, computed as
    /// `ln|Σ1 + D Σ2⁻¹ Dᵀ| − ln|Σ1|`.
    pub fn ln_det_kernel(&self, x: &Matrix) -> Result<f64> {
        check_square(x, self.dim())?;
        let d = x - &self.mean;
        let g = self.sigma2_factor.solve_lower(&d.transpose())?;
        let mut inner = g.tr_matmul(&g);
        inner.add_scaled(1.0, &self.sigma1);
        Ok(spd_factor(&inner.symmetrize())?.log_det() - self.sigma1_factor.log_det())
    }

    pub fn ln_pdf(&self, x: &Matrix) -> Result<f64> {
        let n = self.dim();
        let nf = n as f64;
        let nu = self.dof;
        let kernel = self.ln_det_kernel(x)?;
        Ok(ln_mv_gamma(n, (nu + 2.0 * nf - 1.0) / 2.0)?
            - ln_mv_gamma(n, (nu + nf - 1.0) / 2.0)?
            - nf * nf / 2.0 * LN_PI
            - nf / 2.0 * (self.sigma1_factor.log_det() + self.sigma2_factor.log_det())
            - (nu + 2.0 * nf - 1.0) / 2.0 * kernel)
    }

    /// Normal / inverted-gamma mixture: `W ~ IMG((ν+n−1)/2, 2, Σ1)`, then
    /// `X | W ~ N(B, W, Σ2)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Matrix> {
        let nf = self.dim() as f64;
        let w = InvMatrixGamma::new((self.dof + nf - 1.0) / 2.0, 2.0, &self.sigma1)?.sample(rng);
        let w_factor = crate::linalg::spd_factor_jittered(&w)?;
        let mn = MatrixNormal::from_factors(self.mean.clone(), w_factor, self.sigma2_factor.clone())?;
        Ok(mn.sample(rng))
    }
}

/// Scalar priors and conditionals.
///
/// `InverseGamma { shape: a, scale: b }` follows the convention
/// `f(x) = b^{-a} Γ(a)^{-1} x^{-(a+1)} exp(-1/(b x))`, i.e. rate `1/b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarDist {
    Gamma { shape: f64, scale: f64 },
    /// Gamma restricted to `(lower, ∞)`.
    TruncatedGamma { shape: f64, scale: f64, lower: f64 },
    InverseGamma { shape: f64, scale: f64 },
}

impl ScalarDist {
    /// Inverse gamma with shape `a` and rate `r` (scale `1/r` in the
    /// convention above).
    pub fn inverse_gamma_rate(shape: f64, rate: f64) -> Self {
        ScalarDist::InverseGamma {
            shape,
            scale: 1.0 / rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ScalarDist::Gamma { shape, scale } | ScalarDist::InverseGamma { shape, scale } => {
                check_positive("shape", shape)?;
                check_positive("scale", scale)
            }
            ScalarDist::TruncatedGamma { shape, scale, lower } => {
                check_positive("shape", shape)?;
                check_positive("scale", scale)?;
                if !(lower >= 0.0) || !lower.is_finite() {
                    return Err(Error::domain(alloc::format!("truncation bound must be >= 0, got {lower}")));
                }
                Ok(())
            }
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            ScalarDist::Gamma { shape, scale } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                (shape - 1.0) * ln(x) - x / scale - ln_gamma(shape) - shape * ln(scale)
            }
            ScalarDist::TruncatedGamma { shape, scale, lower } => {
                if x <= lower {
                    return f64::NEG_INFINITY;
                }
                (shape - 1.0) * ln(x) - x / scale - ln_gamma(shape) - shape * ln(scale)
                    - ln(gamma_q(shape, lower / scale))
            }
            ScalarDist::InverseGamma { shape, scale } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                -(shape + 1.0) * ln(x) - 1.0 / (scale * x) - ln_gamma(shape) - shape * ln(scale)
            }
        }
    }

    /// Mean, when finite.
    pub fn mean(&self) -> Option<f64> {
        match *self {
            ScalarDist::Gamma { shape, scale } => Some(shape * scale),
            ScalarDist::TruncatedGamma { shape, scale, lower } => {
                let z = lower / scale;
                // E[X | X > L] = a b Q(a+1, L/b) / Q(a, L/b)
                Some(shape * scale * gamma_q(shape + 1.0, z) / gamma_q(shape, z))
            }
            ScalarDist::InverseGamma { shape, scale } => {
                (shape > 1.0).then(|| 1.0 / (scale * (shape - 1.0)))
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.validate()?;
        match *self {
            ScalarDist::Gamma { shape, scale } => Ok(gamma_draw(shape, scale, rng)),
            ScalarDist::InverseGamma { shape, scale } => Ok(1.0 / gamma_draw(shape, scale, rng)),
            ScalarDist::TruncatedGamma { shape, scale, lower } => {
                Ok(truncated_gamma_draw(shape, scale, lower, rng))
            }
        }
    }
}

fn gamma_draw<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, scale).expect("validated").sample(rng)
}

/// Inverse-CDF draw restricted to `(lower, ∞)`. Whichever tail the target
/// sits in is inverted directly so that neither a left-tail nor a right-tail
/// truncation point loses precision.
fn truncated_gamma_draw<R: Rng + ?Sized>(shape: f64, scale: f64, lower: f64, rng: &mut R) -> f64 {
    let z_low = lower / scale;
    let p_low = gamma_p(shape, z_low);
    let q_low = gamma_q(shape, z_low);
    let u: f64 = rng.random();
    let right_mass = (1.0 - u) * q_low;
    let z = if right_mass < 0.5 {
        gamma_q_inv(shape, right_mass)
    } else {
        gamma_p_inv(shape, p_low + u * q_low)
    };
    let x = z * scale;
    if x > lower {
        x
    } else {
        // the inversion landed on the bound; nudge into the open interval
        lower + f64::EPSILON * lower.max(f64::MIN_POSITIVE) * 4.0
    }
}

/// Scalar normal log-density with variance `var`.
pub fn ln_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (LN_2PI + ln(var)) - (x - mean) * (x - mean) / (2.0 * var)
}
