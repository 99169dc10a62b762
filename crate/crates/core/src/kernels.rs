//! Rotation-invariant kernels `h(φ₂,…,φₙ, r₁,…,rₙ)` and finite-difference
//! checks of their behaviour at the maximizers.
//!
//! A kernel of degree `n` is written in polar coordinates relative to the
//! first point: `φᵢ` is the counterclockwise angle from `U₁` to `Uᵢ` and `rᵢ`
//! is the distance of `Uᵢ` from the origin. The built-in perimeter and area
//! kernels sort the points by angle and sum over consecutive pairs.
//!
//! At each maximizer `V` (all radii equal to one, distinct angles) the limit
//! constant needs the angular sub-Hessian `G` and the radial partials
//! `∂h/∂rⱼ`. These are computed numerically: central differences in the
//! angles and second-order one-sided differences inward from `r = 1`.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::geometry::{wrap_angle, Objective};
use crate::linalg::SquareMatrix;
use crate::scalar::Scalar;

pub const DEFAULT_GRADIENT_STEP: f64 = 1e-5;
/// Second differences divide rounding noise by `step²`, so the Hessian uses a
/// larger step than the gradient.
pub const DEFAULT_HESSIAN_STEP: f64 = 1e-4;
pub const DEFAULT_RADIAL_STEP: f64 = 1e-6;

/// Kernel value as a function of `(angles[n−1], radii[n])`; may be `−∞`.
pub type KernelFn<T> = Arc<dyn Fn(&[T], &[T]) -> T + Send + Sync>;

#[derive(Clone, Debug, PartialEq)]
pub struct Maximizer<T> {
    pub angles: Vec<T>,
    pub radii: Vec<T>,
}

impl<T: Scalar> Maximizer<T> {
    /// Maximizer on the unit circle with the given central angles.
    pub fn on_circle(angles: Vec<T>) -> Self {
        let radii = vec![T::one(); angles.len() + 1];
        Self { angles, radii }
    }

    /// Angles `2π/n, 4π/n, …, 2π(n−1)/n` of the regular inscribed n-gon.
    pub fn regular(n: usize) -> Self {
        let step = T::TAU() / T::from_usize_lossy(n);
        Self::on_circle((1..n).map(|i| step * T::from_usize_lossy(i)).collect())
    }
}

#[derive(Clone)]
pub struct KernelSpec<T> {
    name: String,
    arity: usize,
    evaluate: KernelFn<T>,
    max_value: T,
    maximizers: Vec<Maximizer<T>>,
    multiplicity: usize,
}

impl<T: Scalar> fmt::Debug for KernelSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("max_value", &self.max_value)
            .field("maximizers", &self.maximizers)
            .field("multiplicity", &self.multiplicity)
            .finish()
    }
}

impl<T: Scalar> KernelSpec<T> {
    /// A user-supplied kernel together with its maximum and maximizers.
    ///
    /// The maximizers are checked for the structural requirements (distinct
    /// angles strictly inside `(0, 2π)`, unit radii, value `M` within 1e−10);
    /// global maximality is the caller's claim and is not searched for.
    /// `multiplicity` is the total number of maximizers; when it exceeds the
    /// number listed, the listed ones stand in for symmetric copies.
    pub fn custom(
        name: impl Into<String>,
        arity: usize,
        evaluate: KernelFn<T>,
        max_value: T,
        maximizers: Vec<Maximizer<T>>,
        multiplicity: usize,
    ) -> Result<Self> {
        if arity < 2 {
            return Err(domain("n", format!("kernel degree must be at least 2 (got {arity})")));
        }
        if maximizers.is_empty() {
            return Err(Error::InvalidMaximizer("no maximizers given".into()));
        }
        if multiplicity < maximizers.len() {
            return Err(Error::InvalidMaximizer(format!(
                "multiplicity {multiplicity} is below the {} listed maximizers",
                maximizers.len()
            )));
        }
        let spec = Self {
            name: name.into(),
            arity,
            evaluate,
            max_value,
            maximizers,
            multiplicity,
        };
        for (i, m) in spec.maximizers.iter().enumerate() {
            spec.check_maximizer(m)
                .map_err(|e| Error::InvalidMaximizer(format!("maximizer {i}: {e}")))?;
        }
        Ok(spec)
    }

    fn check_maximizer(&self, m: &Maximizer<T>) -> Result<()> {
        let n = self.arity;
        if m.angles.len() != n - 1 || m.radii.len() != n {
            return Err(Error::InvalidMaximizer(format!(
                "expected {} angles and {n} radii",
                n - 1
            )));
        }
        if m.radii.iter().any(|&r| r != T::one()) {
            return Err(Error::InvalidMaximizer("radii must all equal 1".into()));
        }
        if m.angles.iter().any(|&a| !(a > T::zero() && a < T::TAU())) {
            return Err(Error::InvalidMaximizer("angles must lie in (0, 2π)".into()));
        }
        let mut sorted = m.angles.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
        if sorted.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidMaximizer("angles must be distinct".into()));
        }
        let v = self.evaluate(&m.angles, &m.radii);
        let tol = T::lit(1e-10).max(T::lit(64.0) * T::epsilon() * self.max_value.abs());
        if !((v - self.max_value).abs() <= tol) {
            return Err(Error::InvalidMaximizer(format!(
                "value {v} differs from M = {}",
                self.max_value
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn max_value(&self) -> T {
        self.max_value
    }

    pub fn maximizers(&self) -> &[Maximizer<T>] {
        &self.maximizers
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn evaluate(&self, angles: &[T], radii: &[T]) -> T {
        assert_eq!(angles.len() + 1, self.arity, "kernel expects n−1 angles");
        assert_eq!(radii.len(), self.arity, "kernel expects n radii");
        (self.evaluate)(angles, radii)
    }
}

/// Points `(0, r₁), (φ₂, r₂), …` sorted by angle; each entry is
/// `(angle, radius)`.
fn angular_order<T: Scalar>(angles: &[T], radii: &[T]) -> Vec<(T, T)> {
    let mut pts = Vec::with_capacity(radii.len());
    pts.push((T::zero(), radii[0]));
    pts.extend(angles.iter().zip(&radii[1..]).map(|(&a, &r)| (wrap_angle(a), r)));
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    pts
}

/// Sum of `term(r_a, r_b, Δ)` over cyclically consecutive points, where `Δ`
/// is the angular gap from `a` to `b` (the last gap closes to `2π`).
fn cyclic_sum<T: Scalar>(angles: &[T], radii: &[T], term: impl Fn(T, T, T) -> T) -> T {
    let pts = angular_order(angles, radii);
    let m = pts.len();
    (0..m).fold(T::zero(), |acc, i| {
        let (a0, r0) = pts[i];
        let (a1, r1) = pts[(i + 1) % m];
        let gap = if i + 1 == m { T::TAU() - a0 + a1 } else { a1 - a0 };
        acc + term(r0, r1, gap)
    })
}

pub fn perimeter_polar<T: Scalar>(angles: &[T], radii: &[T]) -> T {
    cyclic_sum(angles, radii, |ra, rb, gap| {
        (ra * ra + rb * rb - T::lit(2.0) * ra * rb * gap.cos())
            .max(T::zero())
            .sqrt()
    })
}

pub fn area_polar<T: Scalar>(angles: &[T], radii: &[T]) -> T {
    cyclic_sum(angles, radii, |ra, rb, gap| ra * rb * gap.sin() / T::lit(2.0))
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Perimeter kernel of degree `n ≥ 2`; `M = 2n·sin(π/n)`.
pub fn perimeter_kernel<T: Scalar>(n: usize) -> Result<KernelSpec<T>> {
    if n < 2 {
        return Err(domain("n", format!("perimeter kernel needs n ≥ 2 (got {n})")));
    }
    let nn = T::from_usize_lossy(n);
    let max_value = T::lit(2.0) * nn * (T::PI() / nn).sin();
    KernelSpec::custom(
        "perimeter",
        n,
        Arc::new(perimeter_polar::<T>),
        max_value,
        vec![Maximizer::regular(n)],
        factorial(n - 1),
    )
}

/// Area kernel of degree `n ≥ 3`; `M = (n/2)·sin(2π/n)`. Two points span no
/// area, so `n = 2` has no isolated maximizer and is rejected.
pub fn area_kernel<T: Scalar>(n: usize) -> Result<KernelSpec<T>> {
    if n < 3 {
        return Err(domain("n", format!("area kernel needs n ≥ 3 (got {n})")));
    }
    let nn = T::from_usize_lossy(n);
    let max_value = nn / T::lit(2.0) * (T::TAU() / nn).sin();
    KernelSpec::custom(
        "area",
        n,
        Arc::new(area_polar::<T>),
        max_value,
        vec![Maximizer::regular(n)],
        factorial(n - 1),
    )
}

pub fn kernel_for<T: Scalar>(objective: Objective, n: usize) -> Result<KernelSpec<T>> {
    match objective {
        Objective::Perimeter => perimeter_kernel(n),
        Objective::Area => area_kernel(n),
    }
}

/// Step sizes for the finite-difference analysis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteDifference<T> {
    pub gradient_step: T,
    pub hessian_step: T,
    pub radial_step: T,
    /// Combine steps `h` and `h/2` as `(4·D(h/2) − D(h))/3`.
    pub richardson: bool,
}

impl<T: Scalar> Default for FiniteDifference<T> {
    fn default() -> Self {
        Self {
            gradient_step: T::lit(DEFAULT_GRADIENT_STEP),
            hessian_step: T::lit(DEFAULT_HESSIAN_STEP),
            radial_step: T::lit(DEFAULT_RADIAL_STEP),
            richardson: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaximizerAnalysis<T> {
    pub angular_gradient: Vec<T>,
    pub sub_hessian: SquareMatrix<T>,
    pub det_neg_g: T,
    pub radial_partials: Vec<T>,
    /// `−G` positive definite.
    pub a6_pass: bool,
    /// Every radial partial strictly positive.
    pub a7_pass: bool,
}

impl<T: Scalar> MaximizerAnalysis<T> {
    pub fn gradient_residual(&self) -> T {
        self.angular_gradient
            .iter()
            .fold(T::zero(), |acc, g| acc.max(g.abs()))
    }
}

struct Probe<'a, T> {
    spec: &'a KernelSpec<T>,
    angles: Vec<T>,
    radii: Vec<T>,
}

impl<'a, T: Scalar> Probe<'a, T> {
    fn new(spec: &'a KernelSpec<T>, at: &Maximizer<T>) -> Result<Self> {
        if at.angles.len() + 1 != spec.arity || at.radii.len() != spec.arity {
            return Err(Error::InvalidMaximizer(format!(
                "point has {} angles and {} radii for a kernel of degree {}",
                at.angles.len(),
                at.radii.len(),
                spec.arity
            )));
        }
        Ok(Self {
            spec,
            angles: at.angles.clone(),
            radii: at.radii.clone(),
        })
    }

    /// Kernel value with angle offsets and radius offsets applied.
    fn eval(&self, dangle: &[(usize, T)], dradius: &[(usize, T)]) -> Result<T> {
        let mut a = self.angles.clone();
        let mut r = self.radii.clone();
        for &(i, d) in dangle {
            a[i] = a[i] + d;
        }
        for &(j, d) in dradius {
            r[j] = r[j] + d;
        }
        let v = self.spec.evaluate(&a, &r);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("angles {a:?}, radii {r:?}")));
        }
        Ok(v)
    }

    fn gradient(&self, h: T) -> Result<Vec<T>> {
        let two = T::lit(2.0);
        (0..self.angles.len())
            .map(|i| Ok((self.eval(&[(i, h)], &[])? - self.eval(&[(i, -h)], &[])?) / (two * h)))
            .collect()
    }

    fn hessian(&self, h: T) -> Result<SquareMatrix<T>> {
        let m = self.angles.len();
        let mut g = SquareMatrix::zeros(m);
        let f0 = self.eval(&[], &[])?;
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        for i in 0..m {
            let d = (self.eval(&[(i, h)], &[])? - two * f0 + self.eval(&[(i, -h)], &[])?) / (h * h);
            g.set(i, i, d);
            for j in i + 1..m {
                let pp = self.eval(&[(i, h), (j, h)], &[])?;
                let pm = self.eval(&[(i, h), (j, -h)], &[])?;
                let mp = self.eval(&[(i, -h), (j, h)], &[])?;
                let mm = self.eval(&[(i, -h), (j, -h)], &[])?;
                let v = (pp - pm - mp + mm) / (four * h * h);
                g.set(i, j, v);
                g.set(j, i, v);
            }
        }
        Ok(g)
    }

    /// `∂h/∂rⱼ` from the one-sided stencil `(3f(r) − 4f(r−δ) + f(r−2δ))/(2δ)`.
    fn radial(&self, delta: T) -> Result<Vec<T>> {
        let f0 = self.eval(&[], &[])?;
        (0..self.radii.len())
            .map(|j| {
                let f1 = self.eval(&[], &[(j, -delta)])?;
                let f2 = self.eval(&[], &[(j, -T::lit(2.0) * delta)])?;
                Ok((T::lit(3.0) * f0 - T::lit(4.0) * f1 + f2) / (T::lit(2.0) * delta))
            })
            .collect()
    }
}

fn richardson<T: Scalar>(coarse: &[T], fine: &[T]) -> Vec<T> {
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    coarse
        .iter()
        .zip(fine)
        .map(|(&c, &f)| (four * f - c) / three)
        .collect()
}

fn check_step<T: Scalar>(step: T) -> Result<()> {
    if !(step > T::zero()) || !step.is_finite() {
        return Err(domain("step", format!("finite-difference step must be positive (got {step})")));
    }
    Ok(())
}

/// Central-difference gradient in the `n − 1` angular arguments.
pub fn numeric_angular_gradient<T: Scalar>(
    spec: &KernelSpec<T>,
    at: &Maximizer<T>,
    step: T,
) -> Result<Vec<T>> {
    check_step(step)?;
    Probe::new(spec, at)?.gradient(step)
}

/// Angular sub-Hessian `G` and `det(−G)`.
pub fn numeric_sub_hessian<T: Scalar>(
    spec: &KernelSpec<T>,
    at: &Maximizer<T>,
    step: T,
) -> Result<(SquareMatrix<T>, T)> {
    check_step(step)?;
    let g = Probe::new(spec, at)?.hessian(step)?;
    let det = g.neg().determinant();
    Ok((g, det))
}

/// Partials `∂h/∂rⱼ` at `r = 1`, differencing inward.
pub fn numeric_radial_partials<T: Scalar>(
    spec: &KernelSpec<T>,
    at: &Maximizer<T>,
    step: T,
) -> Result<Vec<T>> {
    check_step(step)?;
    Probe::new(spec, at)?.radial(step)
}

/// Full analysis of one maximizer with the given step sizes.
pub fn analyze_maximizer<T: Scalar>(
    spec: &KernelSpec<T>,
    at: &Maximizer<T>,
    fd: &FiniteDifference<T>,
) -> Result<MaximizerAnalysis<T>> {
    check_step(fd.gradient_step)?;
    check_step(fd.hessian_step)?;
    check_step(fd.radial_step)?;
    let probe = Probe::new(spec, at)?;
    let half = T::lit(0.5);

    let (angular_gradient, sub_hessian, radial_partials) = if fd.richardson {
        let g = richardson(
            &probe.gradient(fd.gradient_step)?,
            &probe.gradient(fd.gradient_step * half)?,
        );
        let hc = probe.hessian(fd.hessian_step)?;
        let hf = probe.hessian(fd.hessian_step * half)?;
        let flat = richardson(
            &hc.rows().concat(),
            &hf.rows().concat(),
        );
        let m = hc.dim();
        let rows: Vec<Vec<T>> = (0..m).map(|i| flat[i * m..(i + 1) * m].to_vec()).collect();
        let r = richardson(
            &probe.radial(fd.radial_step)?,
            &probe.radial(fd.radial_step * half)?,
        );
        (g, SquareMatrix::from_rows(&rows), r)
    } else {
        (
            probe.gradient(fd.gradient_step)?,
            probe.hessian(fd.hessian_step)?,
            probe.radial(fd.radial_step)?,
        )
    };

    let neg = sub_hessian.neg();
    let det_neg_g = neg.determinant();
    let a6_pass = det_neg_g > T::zero() && neg.is_positive_definite();
    let a7_pass = radial_partials.iter().all(|&p| p > T::zero());
    Ok(MaximizerAnalysis {
        angular_gradient,
        sub_hessian,
        det_neg_g,
        radial_partials,
        a6_pass,
        a7_pass,
    })
}

/// Analyses of every listed maximizer of `spec`.
pub fn analyze_kernel<T: Scalar>(
    spec: &KernelSpec<T>,
    fd: &FiniteDifference<T>,
) -> Result<Vec<MaximizerAnalysis<T>>> {
    spec.maximizers
        .iter()
        .map(|m| analyze_maximizer(spec, m, fd))
        .collect()
}

/// `Σᵢ 1 / (sqrt(det(−Gᵢ)) · Πⱼ (∂h(Vᵢ)/∂rⱼ)^{β+1})` over all maximizers.
///
/// Either one analysis per maximizer (`multiplicity` of them) or a single
/// analysis standing for all symmetric copies is accepted.
pub fn compute_i<T: Scalar>(
    spec: &KernelSpec<T>,
    analyses: &[MaximizerAnalysis<T>],
    beta: T,
) -> Result<T> {
    if analyses.is_empty() {
        return Err(domain("analyses", "no maximizer analyses supplied"));
    }
    if !(beta > -T::one()) {
        return Err(Error::InvalidBeta(beta.to_f64().unwrap_or(f64::NAN)));
    }
    let weight = if analyses.len() == spec.multiplicity {
        T::one()
    } else if analyses.len() == 1 {
        T::from_usize_lossy(spec.multiplicity)
    } else {
        return Err(domain(
            "analyses",
            format!(
                "{} analyses for a kernel with {} maximizers",
                analyses.len(),
                spec.multiplicity
            ),
        ));
    };
    let exponent = beta + T::one();
    let mut total = T::zero();
    for a in analyses {
        if !a.a6_pass {
            return Err(Error::SubHessianDegenerate(a.det_neg_g.to_f64().unwrap_or(f64::NAN)));
        }
        if let Some((index, &value)) = a.radial_partials.iter().enumerate().find(|(_, &p)| !(p > T::zero())) {
            return Err(Error::RadialPartialNonPositive {
                index,
                value: value.to_f64().unwrap_or(f64::NAN),
            });
        }
        let prod = a
            .radial_partials
            .iter()
            .fold(T::one(), |acc, &p| acc * p.powf(exponent));
        total = total + T::one() / (a.det_neg_g.sqrt() * prod);
    }
    Ok(weight * total)
}

/// The determinant `det(−G) = 2^{1−n}·n·s^{n−1}` quoted for the perimeter
/// (`s = sin(π/n)`) and area (`s = sin(2π/n)`) kernels.
pub fn reference_det_neg_g(objective: Objective, n: usize) -> f64 {
    let nf = n as f64;
    let s = reference_angle_sine(objective, n);
    2f64.powf(1.0 - nf) * nf * s.powf(nf - 1.0)
}

/// The radial partial quoted alongside the Weibull constants: `sin(π/n)`
/// for the perimeter and `sin(2π/n)/2` for the area.
///
/// Differentiating the kernels themselves gives twice these values: each
/// radius enters two adjacent terms of the cyclic sum.
pub fn reference_radial_partial(objective: Objective, n: usize) -> f64 {
    match objective {
        Objective::Perimeter => reference_angle_sine(objective, n),
        Objective::Area => 0.5 * reference_angle_sine(objective, n),
    }
}

fn reference_angle_sine(objective: Objective, n: usize) -> f64 {
    let nf = n as f64;
    match objective {
        Objective::Perimeter => (std::f64::consts::PI / nf).sin(),
        Objective::Area => (std::f64::consts::TAU / nf).sin(),
    }
}
