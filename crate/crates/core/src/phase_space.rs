//! Phase-space states for a single particle on a line.
//!
//! Two representations are provided: the parametric [`GaussianState`] and the
//! sampled [`GridDensity`]. Both describe a probability density `rho(q, p)`
//! which is nonnegative and integrates to one over the plane.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// A point `(q, p)` of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub const fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.p.is_finite()
    }
}

/// Product Gaussian density
/// `rho(q, p) = exp(-(q-q0)^2/a^2) exp(-(p-p0)^2/b^2) / (pi a b)`.
///
/// Both widths must be strictly positive: point (delta) states are not
/// representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    q0: f64,
    p0: f64,
    a: f64,
    b: f64,
}

impl GaussianState {
    pub fn new(q0: f64, p0: f64, a: f64, b: f64) -> Result<Self> {
        if !q0.is_finite() || !p0.is_finite() {
            return Err(invalid("q0/p0", "centre must be finite"));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid("a", format!("position width must be > 0, got {a}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(invalid("b", format!("momentum width must be > 0, got {b}")));
        }
        Ok(Self { q0, p0, a, b })
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn center(&self) -> PhasePoint {
        PhasePoint::new(self.q0, self.p0)
    }

    pub fn density_at(&self, z: PhasePoint) -> f64 {
        let dq = (z.q - self.q0) / self.a;
        let dp = (z.p - self.p0) / self.b;
        (-(dq * dq) - dp * dp).exp() / (PI * self.a * self.b)
    }

    /// Means `(q0, p0)`, variances `a^2/2` and `b^2/2`, zero covariance.
    pub fn moments(&self) -> MomentState {
        MomentState {
            mean_q: self.q0,
            mean_p: self.p0,
            var_q: 0.5 * self.a * self.a,
            var_p: 0.5 * self.b * self.b,
            cov_qp: 0.0,
        }
    }
}

/// First moments and central second moments of a phase-space density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentState {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    pub cov_qp: f64,
}

impl MomentState {
    /// `cov^2 - var_q var_p`; nonpositive for any genuine density.
    pub fn covariance_excess(&self) -> f64 {
        self.cov_qp * self.cov_qp - self.var_q * self.var_p
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let fields = [self.mean_q, self.mean_p, self.var_q, self.var_p, self.cov_qp];
        fields.iter().all(|v| v.is_finite())
            && self.var_q >= -tol
            && self.var_p >= -tol
            && self.covariance_excess() <= tol
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.mean_q, self.mean_p, self.var_q, self.var_p, self.cov_qp]
    }
}

/// Largest polynomial degree accepted by [`Potential::new`].
pub const DEFAULT_MAX_DEGREE: usize = 6;

/// Polynomial potential `V(q) = sum_k c_k q^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    coefficients: Vec<f64>,
}

impl Potential {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        Self::with_max_degree(coefficients, DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(mut coefficients: Vec<f64>, max_degree: usize) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(invalid("potential", "at least one coefficient is required"));
        }
        if let Some(c) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(invalid("potential", format!("non-finite coefficient {c}")));
        }
        while coefficients.len() > 1 && coefficients[coefficients.len() - 1] == 0.0 {
            coefficients.pop();
        }
        let degree = coefficients.len() - 1;
        if degree > max_degree {
            return Err(Error::DegreeTooHigh {
                degree,
                max: max_degree,
            });
        }
        Ok(Self { coefficients })
    }

    pub fn zero() -> Self {
        Self {
            coefficients: vec![0.0],
        }
    }

    /// `V(q) = k q^2 / 2`.
    pub fn harmonic(k: f64) -> Self {
        Self::new(vec![0.0, 0.0, 0.5 * k]).expect("finite stiffness")
    }

    /// `V(q) = lambda q^4 / 4`.
    pub fn quartic(lambda: f64) -> Self {
        Self::new(vec![0.0, 0.0, 0.0, 0.0, 0.25 * lambda]).expect("finite coupling")
    }

    /// Coefficients `c_0..c_d` with trailing zeros removed.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn value(&self, q: f64) -> f64 {
        self.eval_derivative(q, 0)
    }

    /// `d^k V / dq^k` at `q` for `k <= 3`.
    pub fn derivative(&self, q: f64, order: usize) -> Result<f64> {
        if order > 3 {
            return Err(Error::UnsupportedOrder(order));
        }
        Ok(self.eval_derivative(q, order))
    }

    /// `V'(q)` without the order check.
    pub fn slope(&self, q: f64) -> f64 {
        self.eval_derivative(q, 1)
    }

    fn eval_derivative(&self, q: f64, order: usize) -> f64 {
        // Horner on the coefficients of the k-th derivative.
        let c = &self.coefficients;
        let mut acc = 0.0;
        for k in (order..c.len()).rev() {
            let falling = ((k - order + 1)..=k).fold(1.0, |f, j| f * j as f64);
            acc = acc * q + c[k] * falling;
        }
        acc
    }
}

/// `H = p^2 / (2m) + V(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    mass: f64,
    potential: Potential,
}

impl Hamiltonian {
    pub fn new(mass: f64, potential: Potential) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid("mass", format!("must be > 0, got {mass}")));
        }
        Ok(Self { mass, potential })
    }

    pub fn free(mass: f64) -> Result<Self> {
        Self::new(mass, Potential::zero())
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn energy(&self, z: PhasePoint) -> f64 {
        0.5 * z.p * z.p / self.mass + self.potential.value(z.q)
    }

    /// `-dV/dq`.
    pub fn force(&self, q: f64) -> f64 {
        -self.potential.slope(q)
    }
}

/// Something that can be averaged against a phase-space density.
pub trait Observable {
    fn eval(&self, z: PhasePoint) -> f64;
}

impl<F> Observable for F
where
    F: Fn(PhasePoint) -> f64,
{
    fn eval(&self, z: PhasePoint) -> f64 {
        self(z)
    }
}

/// Named observables with stable report column names.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    One,
    Q,
    P,
    Q2,
    P2,
    /// `(q - c)^2`
    QShifted(f64),
    /// `(p - c)^2`
    PShifted(f64),
    Energy(Hamiltonian),
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::One => "one",
            Builtin::Q => "q",
            Builtin::P => "p",
            Builtin::Q2 => "q2",
            Builtin::P2 => "p2",
            Builtin::QShifted(_) => "dq2",
            Builtin::PShifted(_) => "dp2",
            Builtin::Energy(_) => "energy",
        }
    }
}

impl Observable for Builtin {
    fn eval(&self, z: PhasePoint) -> f64 {
        match self {
            Builtin::One => 1.0,
            Builtin::Q => z.q,
            Builtin::P => z.p,
            Builtin::Q2 => z.q * z.q,
            Builtin::P2 => z.p * z.p,
            Builtin::QShifted(c) => (z.q - c) * (z.q - c),
            Builtin::PShifted(c) => (z.p - c) * (z.p - c),
            Builtin::Energy(h) => h.energy(z),
        }
    }
}

/// Rectangular phase-space domain with `nq x np` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nq: usize,
    pub np: usize,
}

impl GridSpec {
    pub fn new(q: (f64, f64), p: (f64, f64), nq: usize, np: usize) -> Result<Self> {
        let spec = Self {
            q_min: q.0,
            q_max: q.1,
            p_min: p.0,
            p_max: p.1,
            nq,
            np,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Square domain `[-half, half]^2` with `n x n` cells.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new((-half, half), (-half, half), n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let bounds = [self.q_min, self.q_max, self.p_min, self.p_max];
        if bounds.iter().any(|b| !b.is_finite()) {
            return Err(invalid("grid", "bounds must be finite"));
        }
        if self.q_min >= self.q_max || self.p_min >= self.p_max {
            return Err(invalid("grid", "bounds must satisfy min < max"));
        }
        if self.nq < 2 || self.np < 2 {
            return Err(invalid("grid", "at least 2 cells per axis are required"));
        }
        Ok(())
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / self.nq as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / self.np as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dq() * self.dp()
    }

    pub fn q_at(&self, i: usize) -> f64 {
        self.q_min + (i as f64 + 0.5) * self.dq()
    }

    pub fn p_at(&self, j: usize) -> f64 {
        self.p_min + (j as f64 + 0.5) * self.dp()
    }

    pub fn node(&self, i: usize, j: usize) -> PhasePoint {
        PhasePoint::new(self.q_at(i), self.p_at(j))
    }

    pub fn len(&self) -> usize {
        self.nq * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Interpolation used to read a [`GridDensity`] between cell centres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    Bilinear,
    /// Tensor-product 4-point Lagrange cubic; negative overshoots clamp to 0.
    #[default]
    CubicClamped,
}

/// Density samples at cell centres, stored row-major with `q` as the slow
/// index. Values outside the domain are taken to be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(invalid(
                "values",
                format!("expected {} samples, got {}", spec.len(), values.len()),
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("values", "samples must be finite and nonnegative"));
        }
        Ok(Self { spec, values })
    }

    /// Samples `state` at cell centres and renormalizes to unit mass.
    ///
    /// The domain must extend at least three widths either side of the
    /// centre along each axis. Use [`GridDensity::from_gaussian_truncated`]
    /// to skip that check; the sampled mass must still reach 0.99.
    pub fn from_gaussian(state: &GaussianState, spec: GridSpec) -> Result<Self> {
        let covers = spec.q_min <= state.q0 - 3.0 * state.a
            && spec.q_max >= state.q0 + 3.0 * state.a
            && spec.p_min <= state.p0 - 3.0 * state.b
            && spec.p_max >= state.p0 + 3.0 * state.b;
        if !covers {
            spec.validate()?;
            return Err(invalid(
                "grid",
                "domain must cover three widths either side of the Gaussian centre",
            ));
        }
        Self::from_gaussian_truncated(state, spec)
    }

    pub fn from_gaussian_truncated(state: &GaussianState, spec: GridSpec) -> Result<Self> {
        Self::from_fn(spec, |z| state.density_at(z))
    }

    /// Samples an arbitrary nonnegative density and renormalizes it.
    pub fn from_fn<F>(spec: GridSpec, density: F) -> Result<Self>
    where
        F: Fn(PhasePoint) -> f64 + Sync,
    {
        spec.validate()?;
        let mut values = vec![0.0; spec.len()];
        values
            .par_chunks_mut(spec.np)
            .enumerate()
            .for_each(|(i, row)| {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = density(spec.node(i, j)).max(0.0);
                }
            });
        let mut grid = Self::new(spec, values)?;
        let mass = grid.total_mass();
        if mass.is_nan() || mass < 0.99 {
            return Err(Error::DomainTooSmall { mass });
        }
        grid.scale(1.0 / mass);
        Ok(grid)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Exchanges the sample buffer with `other`, which must have equal length.
    pub(crate) fn swap_values(&mut self, other: &mut Vec<f64>) {
        debug_assert_eq!(other.len(), self.values.len());
        std::mem::swap(&mut self.values, other);
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.np + j]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    /// Midpoint-rule integral of the samples.
    pub fn total_mass(&self) -> f64 {
        // Row sums first, then an ordered sum, so the result is independent
        // of thread scheduling.
        let row_sums: Vec<f64> = self
            .values
            .par_chunks(self.spec.np)
            .map(|row| row.iter().sum::<f64>())
            .collect();
        row_sums.iter().sum::<f64>() * self.spec.cell_area()
    }

    /// Midpoint-rule value of `integral f(q, p) rho(q, p) dq dp`.
    pub fn integrate<O: Observable + ?Sized>(&self, f: &O) -> f64 {
        let spec = &self.spec;
        let mut total = 0.0;
        for i in 0..spec.nq {
            let row = &self.values[i * spec.np..(i + 1) * spec.np];
            let mut acc = 0.0;
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    acc += v * f.eval(spec.node(i, j));
                }
            }
            total += acc;
        }
        total * spec.cell_area()
    }

    /// Means and central second moments, normalized by the grid mass.
    pub fn moments(&self) -> MomentState {
        let mass = self.integrate(&Builtin::One);
        let mean_q = self.integrate(&Builtin::Q) / mass;
        let mean_p = self.integrate(&Builtin::P) / mass;
        let var_q = self.integrate(&Builtin::QShifted(mean_q)) / mass;
        let var_p = self.integrate(&Builtin::PShifted(mean_p)) / mass;
        let cov_qp = self.integrate(&|z: PhasePoint| (z.q - mean_q) * (z.p - mean_p)) / mass;
        MomentState {
            mean_q,
            mean_p,
            var_q,
            var_p,
            cov_qp,
        }
    }

    /// `integral |rho - other| dq dp` on a shared grid.
    pub fn l1_distance(&self, other: &GridDensity) -> Result<f64> {
        if self.spec != other.spec {
            return Err(invalid("grid", "densities live on different grids"));
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(sum * self.spec.cell_area())
    }

    /// Reads the field at an arbitrary point; zero outside the domain.
    pub fn sample(&self, z: PhasePoint, interpolation: Interpolation) -> f64 {
        let x = (z.q - self.spec.q_min) / self.spec.dq() - 0.5;
        let y = (z.p - self.spec.p_min) / self.spec.dp() - 0.5;
        match interpolation {
            Interpolation::Bilinear => self.bilinear(x, y),
            Interpolation::CubicClamped => self.cubic(x, y).max(0.0),
        }
    }

    #[inline]
    fn at_or_zero(&self, i: isize, j: isize) -> f64 {
        if i < 0 || j < 0 || i >= self.spec.nq as isize || j >= self.spec.np as isize {
            0.0
        } else {
            self.values[i as usize * self.spec.np + j as usize]
        }
    }

    #[inline]
    pub(crate) fn bilinear(&self, x: f64, y: f64) -> f64 {
        if !(x > -1.0 && y > -1.0 && x < self.spec.nq as f64 && y < self.spec.np as f64) {
            return 0.0;
        }
        let i0 = x.floor();
        let j0 = y.floor();
        let (tx, ty) = (x - i0, y - j0);
        let (i0, j0) = (i0 as isize, j0 as isize);
        let v00 = self.at_or_zero(i0, j0);
        let v01 = self.at_or_zero(i0, j0 + 1);
        let v10 = self.at_or_zero(i0 + 1, j0);
        let v11 = self.at_or_zero(i0 + 1, j0 + 1);
        (1.0 - tx) * ((1.0 - ty) * v00 + ty * v01) + tx * ((1.0 - ty) * v10 + ty * v11)
    }

    /// Unclamped cubic interpolant at fractional index `(x, y)`.
    #[inline]
    pub(crate) fn cubic(&self, x: f64, y: f64) -> f64 {
        let (nq, np) = (self.spec.nq as isize, self.spec.np as isize);
        if !(x > -2.0 && y > -2.0 && x < (nq + 1) as f64 && y < (np + 1) as f64) {
            return 0.0;
        }
        let fx = x.floor();
        let fy = y.floor();
        let wx = lagrange_weights(x - fx);
        let wy = lagrange_weights(y - fy);
        let (i0, j0) = (fx as isize - 1, fy as isize - 1);

        if i0 >= 0 && j0 >= 0 && i0 + 3 < nq && j0 + 3 < np {
            let np = np as usize;
            let base = i0 as usize * np + j0 as usize;
            let mut acc = 0.0;
            for (di, w) in wx.iter().enumerate() {
                let row = &self.values[base + di * np..base + di * np + 4];
                acc += w * (wy[0] * row[0] + wy[1] * row[1] + wy[2] * row[2] + wy[3] * row[3]);
            }
            return acc;
        }

        let mut acc = 0.0;
        for (di, w) in wx.iter().enumerate() {
            let mut r = 0.0;
            for (dj, v) in wy.iter().enumerate() {
                r += v * self.at_or_zero(i0 + di as isize, j0 + dj as isize);
            }
            acc += w * r;
        }
        acc
    }
}

/// Weights of the 4-point Lagrange interpolant on nodes `-1, 0, 1, 2`.
#[inline]
fn lagrange_weights(t: f64) -> [f64; 4] {
    let tm1 = t - 1.0;
    let tm2 = t - 2.0;
    let tp1 = t + 1.0;
    [
        -t * tm1 * tm2 / 6.0,
        tp1 * tm1 * tm2 / 2.0,
        -tp1 * t * tm2 / 2.0,
        tp1 * t * tm1 / 6.0,
    ]
}
