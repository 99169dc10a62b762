//! Constants of the Weibull limit law for the scaled deficiency
//! `T = N^A · (M − H_N)`:
//!
//! ```text
//! P[T ≤ t] → 1 − exp(−B · t^C),   C = (β + 3/2)·n − 1/2,   A = n / C,
//! B = K_n · I
//! ```
//!
//! `K_n` depends only on `(n, β)`; `I` collects the second-order behaviour of
//! the kernel at its maximizers (see [`crate::kernels::compute_i`]). For the
//! perimeter and area kernels `I` has the closed form in [`closed_form_i`].

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::geometry::Objective;
use crate::kernels::{compute_i, KernelSpec, MaximizerAnalysis};

fn check_params(n: usize, beta: f64) -> Result<()> {
    if n < 2 {
        return Err(domain("n", format!("kernel degree must be at least 2 (got {n})")));
    }
    if !(beta > -1.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    Ok(())
}

/// `K_n` evaluated entirely in log space:
///
/// ```text
/// K_n = 2^{(β+1/2)n+1/2} Γ((β+3/2)n+1/2) Γ(β+2)^n
///       / (π^{(n−1)/2} n! Γ((n+1)/2) Γ((β+3/2)n+β+3/2))
/// ```
pub fn compute_k(n: usize, beta: f64) -> Result<f64> {
    check_params(n, beta)?;
    let nf = n as f64;
    let ln2 = std::f64::consts::LN_2;
    let lnpi = std::f64::consts::PI.ln();
    let growth = (beta + 1.5) * nf;
    let log_k = (beta + 0.5) * nf * ln2 + 0.5 * ln2 + ln_gamma(growth + 0.5)
        + nf * ln_gamma(beta + 2.0)
        - 0.5 * (nf - 1.0) * lnpi
        - ln_gamma(nf + 1.0)
        - ln_gamma(0.5 * (nf + 1.0))
        - ln_gamma(growth + beta + 1.5);
    Ok(log_k.exp())
}

/// Weibull shape `C = n(β + 3/2) − 1/2`.
pub fn shape_c(n: usize, beta: f64) -> Result<f64> {
    check_params(n, beta)?;
    Ok(n as f64 * (beta + 1.5) - 0.5)
}

/// Normalization exponent `A = n / (n(β + 3/2) − 1/2)`.
pub fn exponent_a(n: usize, beta: f64) -> Result<f64> {
    Ok(n as f64 / shape_c(n, beta)?)
}

/// `B = K_n · I`.
pub fn rate_constant_b(n: usize, beta: f64, i: f64) -> Result<f64> {
    if !(i > 0.0) || !i.is_finite() {
        return Err(domain("I", format!("must be positive and finite (got {i})")));
    }
    Ok(compute_k(n, beta)? * i)
}

/// Largest perimeter `2n·sin(π/n)` or area `(n/2)·sin(2π/n)` of an n-gon in
/// the unit disk, attained by the regular inscribed n-gon.
pub fn extremal_value(objective: Objective, n: usize) -> Result<f64> {
    let nf = n as f64;
    match objective {
        Objective::Perimeter if n >= 2 => Ok(2.0 * nf * (std::f64::consts::PI / nf).sin()),
        Objective::Area if n >= 3 => Ok(0.5 * nf * (std::f64::consts::TAU / nf).sin()),
        _ => Err(domain("n", format!("{objective} needs a larger n (got {n})"))),
    }
}

/// Closed-form `I` paired with `K_n` in the explicit limit laws:
///
/// ```text
/// perimeter: (n−1)! · 2^{(n−1)/2}    / (√n · sin(π/n)^C)
/// area:      (n−1)! · 2^{C}          / (√n · sin(2π/n)^C)
/// ```
pub fn closed_form_i(objective: Objective, n: usize, beta: f64) -> Result<f64> {
    let c = shape_c(n, beta)?;
    extremal_value(objective, n)?;
    let nf = n as f64;
    let ln_fact = ln_gamma(nf);
    let ln2 = std::f64::consts::LN_2;
    let (ln_pow2, sine) = match objective {
        Objective::Perimeter => (0.5 * (nf - 1.0) * ln2, (std::f64::consts::PI / nf).sin()),
        Objective::Area => (c * ln2, (std::f64::consts::TAU / nf).sin()),
    };
    Ok((ln_fact + ln_pow2 - 0.5 * nf.ln() - c * sine.ln()).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub n: usize,
    pub beta: f64,
    /// Extremal kernel value.
    pub m: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k_n: f64,
    pub i: f64,
}

impl LimitLaw {
    pub fn new(n: usize, beta: f64, m: f64, i: f64) -> Result<Self> {
        let c = shape_c(n, beta)?;
        let a = exponent_a(n, beta)?;
        let k_n = compute_k(n, beta)?;
        let b = rate_constant_b(n, beta, i)?;
        if !(m > 0.0) || !m.is_finite() {
            return Err(domain("M", format!("must be positive and finite (got {m})")));
        }
        Ok(Self {
            n,
            beta,
            m,
            a,
            b,
            c,
            k_n,
            i,
        })
    }

    /// Law for a general kernel from its numerically analysed maximizers.
    pub fn from_kernel(
        spec: &KernelSpec<f64>,
        analyses: &[MaximizerAnalysis<f64>],
        beta: f64,
    ) -> Result<Self> {
        let i = compute_i(spec, analyses, beta)?;
        Self::new(spec.arity(), beta, spec.max_value(), i)
    }

    /// `1 − exp(−B·t^C)`; zero for `t ≤ 0`.
    pub fn cdf(&self, t: f64) -> f64 {
        weibull_cdf(self, t)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        (-(-p).ln_1p() / self.b).powf(1.0 / self.c)
    }

    pub fn median(&self) -> f64 {
        (std::f64::consts::LN_2 / self.b).powf(1.0 / self.c)
    }

    /// Scaled statistic `N^A · (M − H)`.
    pub fn scale(&self, sample_size: usize, h: f64) -> f64 {
        (sample_size as f64).powf(self.a) * (self.m - h)
    }
}

pub fn weibull_cdf(law: &LimitLaw, t: f64) -> f64 {
    if !(t > 0.0) {
        return 0.0;
    }
    -(-law.b * t.powf(law.c)).exp_m1()
}

/// Law for the perimeter or area U-max statistic.
pub fn law_for(objective: Objective, n: usize, beta: f64) -> Result<LimitLaw> {
    let m = extremal_value(objective, n)?;
    let i = closed_form_i(objective, n, beta)?;
    LimitLaw::new(n, beta, m, i)
}
