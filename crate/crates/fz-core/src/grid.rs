//! Sampled functions on the square [-a, a]^2 and their lattice Fourier
//! tables.
//!
//! Grids are sampled at cell centers x_i = -a + (i + 1/2) * 2a/N. The
//! rectangular Fourier path is one 2D FFT plus the half-cell phase
//! correction that the center convention implies; the polar path evaluates
//! the same integrals by Gauss-Legendre x trapezoid quadrature over the
//! half-radius disk. Both approximate
//!   f_hat(k) = integral over the square of f(x) e^(-i pi k.x / a) dx.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::descriptor::Descriptor;
use crate::error::{FzError, Result};
use crate::exec;
use crate::lattice::LatticePoint;
use crate::quad::{neg_one_pow, GaussLegendre};

/// Uniform complex samples of a disk-supported function on [-a, a]^2.
///
/// Values at cells whose centers lie outside the declared support radius are
/// exactly zero.
#[derive(Debug, Clone)]
pub struct GridFunction {
    a: f64,
    n: usize,
    support_radius: f64,
    values: Vec<Complex64>,
}

impl GridFunction {
    /// Wraps raw samples. `values` is row-major with x1 fastest; its length
    /// must be n^2, n must be a power of two, and cells whose centers lie
    /// outside the declared support radius must hold (near-)zeros.
    pub fn from_values(
        a: f64,
        n: usize,
        support_radius: f64,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if !(a > 0.0) {
            return Err(FzError::Domain(format!(
                "half-width must be positive, got {a}"
            )));
        }
        if !n.is_power_of_two() {
            return Err(FzError::Domain(format!(
                "samples per axis must be a power of two, got {n}"
            )));
        }
        if !(support_radius > 0.0 && support_radius <= a) {
            return Err(FzError::Domain(format!(
                "support radius {support_radius} outside (0, {a}]"
            )));
        }
        if values.len() != n * n {
            return Err(FzError::Geometry(format!(
                "expected {} values, got {}",
                n * n,
                values.len()
            )));
        }
        let g = Self {
            a,
            n,
            support_radius,
            values,
        };
        let leak = g.max_abs_outside(support_radius);
        if leak > 1e-14 * g.peak().max(1.0) {
            return Err(FzError::SupportViolation(format!(
                "magnitude {leak:.3e} outside the declared support radius {support_radius}"
            )));
        }
        Ok(g)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Cell width 2a/N.
    pub fn cell_width(&self) -> f64 {
        2.0 * self.a / self.n as f64
    }

    /// Center coordinate of cell index i along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.a + (i as f64 + 0.5) * self.cell_width()
    }

    #[inline]
    pub fn value(&self, i1: usize, i2: usize) -> Complex64 {
        self.values[i2 * self.n + i1]
    }

    /// Cell-sum times cell area: the plain integral of the samples.
    pub fn mass(&self) -> Complex64 {
        let mut acc = crate::quad::ComplexAccumulator::new();
        for &v in &self.values {
            acc.add(v);
        }
        acc.value() * self.cell_width().powi(2)
    }

    /// Largest |value| over cells whose centers lie outside the given radius.
    pub fn max_abs_outside(&self, radius: f64) -> f64 {
        let mut worst = 0.0f64;
        for i2 in 0..self.n {
            let y = self.coord(i2);
            for i1 in 0..self.n {
                let x = self.coord(i1);
                if x.hypot(y) > radius {
                    worst = worst.max(self.value(i1, i2).norm());
                }
            }
        }
        worst
    }

    /// Largest |value| over the whole grid.
    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// True if every value is real up to rounding.
    pub fn is_real(&self) -> bool {
        let scale = self.peak().max(1e-300);
        self.values.iter().all(|v| v.im.abs() <= 1e-12 * scale)
    }
}

/// Samples a descriptor at cell centers, hard-masked to zero outside the
/// support radius.
pub fn sample_function(
    desc: &Descriptor,
    a: f64,
    n: usize,
    support_radius: f64,
) -> Result<GridFunction> {
    if !(support_radius > 0.0 && support_radius <= a) {
        return Err(FzError::Domain(format!(
            "support radius {support_radius} outside (0, {a}]"
        )));
    }
    if !n.is_power_of_two() {
        return Err(FzError::Domain(format!(
            "samples per axis must be a power of two, got {n}"
        )));
    }
    let h = 2.0 * a / n as f64;
    let coord = |i: usize| -a + (i as f64 + 0.5) * h;
    let rows = exec::map(n, |i2| {
        let y = coord(i2);
        let mut row = Vec::with_capacity(n);
        for i1 in 0..n {
            let x = coord(i1);
            if x.hypot(y) <= support_radius {
                row.push(desc.eval(x, y, support_radius));
            } else {
                row.push(Complex64::new(0.0, 0.0));
            }
        }
        row
    });
    let values = rows.into_iter().flatten().collect();
    GridFunction::from_values(a, n, support_radius, values)
}

/// Zeroes every cell whose center lies outside the disk of the given radius
/// and tightens the declared support.
pub fn restrict_to_disk(g: &GridFunction, radius: f64) -> Result<GridFunction> {
    if radius > g.a {
        return Err(FzError::Domain(format!(
            "restriction radius {radius} exceeds the half-width {}",
            g.a
        )));
    }
    let mut values = g.values.clone();
    for i2 in 0..g.n {
        let y = g.coord(i2);
        for i1 in 0..g.n {
            let x = g.coord(i1);
            if x.hypot(y) > radius {
                values[i2 * g.n + i1] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let support = if radius > 0.0 {
        radius.min(g.support_radius)
    } else {
        g.cell_width() * 0.25
    };
    GridFunction::from_values(g.a, g.n, support.min(g.a).max(f64::MIN_POSITIVE), values)
}

/// Embeds a grid of half-width b into the square of half-width a = 2b by
/// zero-padding. Requires n_target = 2N so cells align exactly.
pub fn embed_zero_padded(g: &GridFunction, n_target: usize) -> Result<GridFunction> {
    if n_target != 2 * g.n {
        return Err(FzError::Geometry(format!(
            "zero-padded embedding needs n_target = 2N = {}, got {n_target}",
            2 * g.n
        )));
    }
    let a = 2.0 * g.a;
    let mut values = vec![Complex64::new(0.0, 0.0); n_target * n_target];
    let off = g.n / 2;
    for i2 in 0..g.n {
        for i1 in 0..g.n {
            values[(i2 + off) * n_target + (i1 + off)] = g.value(i1, i2);
        }
    }
    GridFunction::from_values(a, n_target, g.support_radius, values)
}

/// Inverse of [`embed_zero_padded`]: keeps the central half of the square,
/// halving the half-width at the same cell size. The grid must carry no
/// magnitude above 1e-12 outside the inner square's inscribed disk.
pub fn extract_central_half(g: &GridFunction) -> Result<GridFunction> {
    let n = g.n;
    if n % 2 != 0 || !(n / 2).is_power_of_two() {
        return Err(FzError::Geometry(format!(
            "cannot halve a grid with N = {n}"
        )));
    }
    let b = g.a / 2.0;
    let leak = g.max_abs_outside(b);
    if leak > 1e-12 {
        return Err(FzError::SupportViolation(format!(
            "magnitude {leak:.3e} outside the inner disk of radius {b}"
        )));
    }
    let half = n / 2;
    let off = n / 4;
    let mut values = Vec::with_capacity(half * half);
    for i2 in 0..half {
        for i1 in 0..half {
            values.push(g.value(i1 + off, i2 + off));
        }
    }
    GridFunction::from_values(b, half, g.support_radius.min(b), values)
}

/// Origin of a lattice Fourier table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableSource {
    /// FFT of a sampled grid over the full square.
    Rectangular,
    /// Direct quadrature over the half-radius disk.
    Polar,
}

/// Lattice Fourier coefficients f_hat(k) on the box {|k1|, |k2| <= kmax}.
#[derive(Debug, Clone)]
pub struct FourierTable {
    a: f64,
    kmax: u32,
    source: TableSource,
    coeffs: Vec<Complex64>,
}

impl FourierTable {
    pub fn new(a: f64, kmax: u32, source: TableSource, coeffs: Vec<Complex64>) -> Result<Self> {
        let dim = 2 * kmax as usize + 1;
        if coeffs.len() != dim * dim {
            return Err(FzError::Geometry(format!(
                "expected {} coefficients for kmax = {kmax}, got {}",
                dim * dim,
                coeffs.len()
            )));
        }
        Ok(Self {
            a,
            kmax,
            source,
            coeffs,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn kmax(&self) -> u32 {
        self.kmax
    }

    pub fn source(&self) -> TableSource {
        self.source
    }

    #[inline]
    fn offset(&self, k: LatticePoint) -> usize {
        let dim = 2 * self.kmax as i32 + 1;
        let i1 = k.k1 + self.kmax as i32;
        let i2 = k.k2 + self.kmax as i32;
        (i1 * dim + i2) as usize
    }

    /// Coefficient at a box lattice point.
    #[inline]
    pub fn get(&self, k: LatticePoint) -> Complex64 {
        self.coeffs[self.offset(k)]
    }

    pub fn contains(&self, k: LatticePoint) -> bool {
        k.k1.unsigned_abs() <= self.kmax && k.k2.unsigned_abs() <= self.kmax
    }

    /// Raw coefficients in flat box order (k1 outer, k2 inner, ascending).
    pub fn flat(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Box points in flat row-major order (k1 outer, k2 inner), ascending.
    pub fn box_points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        let k = self.kmax as i32;
        (-k..=k).flat_map(move |k1| (-k..=k).map(move |k2| LatticePoint::new(k1, k2)))
    }

    /// Worst deviation from Hermitian symmetry f_hat(-k) = conj(f_hat(k)).
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in self.box_points() {
            let mk = LatticePoint::new(-k.k1, -k.k2);
            worst = worst.max((self.get(mk) - self.get(k).conj()).norm());
        }
        worst
    }
}

/// In-place 2D FFT (rows along x1, then columns), unnormalized.
pub(crate) fn fft2d(values: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in values.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    // Transpose, transform what were columns, transpose back.
    transpose(values, n);
    for row in values.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    transpose(values, n);
}

fn transpose(values: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            values.swap(i * n + j, j * n + i);
        }
    }
}

/// Midpoint-rule Fourier coefficients of a sampled grid, for the whole box
/// |k1|, |k2| <= kmax, via one FFT and the half-cell phase correction.
pub fn fourier_coeffs(g: &GridFunction, kmax: u32) -> Result<FourierTable> {
    if kmax as usize > g.n / 2 - 1 {
        return Err(FzError::Geometry(format!(
            "kmax = {kmax} too large for N = {}; need kmax <= N/2 - 1",
            g.n
        )));
    }
    if kmax == 0 {
        return Err(FzError::Domain("kmax must be at least 1".into()));
    }
    let n = g.n;
    let mut buf = g.values.clone();
    fft2d(&mut buf, n, false);

    let h2 = g.cell_width().powi(2);
    let k = kmax as i32;
    let dim = 2 * kmax as usize + 1;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); dim * dim];
    for k1 in -k..=k {
        let b1 = k1.rem_euclid(n as i32) as usize;
        for k2 in -k..=k {
            let b2 = k2.rem_euclid(n as i32) as usize;
            // Samples sit half a cell off the corner grid; fold that shift
            // plus the (-1)^(k1+k2) centering factor into one phase.
            let phase = neg_one_pow(k1 + k2)
                * Complex64::from_polar(1.0, -std::f64::consts::PI * (k1 + k2) as f64 / n as f64);
            let val = buf[b2 * n + b1] * phase * h2;
            coeffs[((k1 + k) * dim as i32 + (k2 + k)) as usize] = val;
        }
    }
    FourierTable::new(g.a, kmax, TableSource::Rectangular, coeffs)
}

fn polar_nodes(desc: &Descriptor, b: f64, nr: usize, ntheta: usize) -> Vec<(Complex64, f64, f64)> {
    let rule = GaussLegendre::new(nr);
    let wt = std::f64::consts::TAU / ntheta as f64;
    let mut nodes = Vec::with_capacity(nr * ntheta);
    for (r, wr) in rule.scaled(0.0, b) {
        for j in 0..ntheta {
            let theta = j as f64 * std::f64::consts::TAU / ntheta as f64;
            let (x, y) = (r * theta.cos(), r * theta.sin());
            let w = desc.eval(x, y, b) * (wr * wt * r);
            nodes.push((w, x, y));
        }
    }
    nodes
}

fn polar_table_from_nodes(
    nodes: &[(Complex64, f64, f64)],
    a: f64,
    kmax: u32,
    parallel: bool,
) -> Vec<Complex64> {
    let dim = 2 * kmax as usize + 1;
    let kf = kmax as f64;
    let accumulate = |acc: &mut Vec<Complex64>, chunk: &[(Complex64, f64, f64)]| {
        for &(w, x, y) in chunk {
            let pu = -std::f64::consts::PI * x / a;
            let pv = -std::f64::consts::PI * y / a;
            let eu = Complex64::from_polar(1.0, pu);
            let ev = Complex64::from_polar(1.0, pv);
            let pv0 = Complex64::from_polar(1.0, -kf * pv);
            let mut row = w * Complex64::from_polar(1.0, -kf * pu);
            for i1 in 0..dim {
                let mut t = row * pv0;
                let base = i1 * dim;
                for cell in &mut acc[base..base + dim] {
                    *cell += t;
                    t *= ev;
                }
                row *= eu;
            }
        }
    };

    let zero = || vec![Complex64::new(0.0, 0.0); dim * dim];
    if parallel {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            let chunk = (nodes.len() / (8 * rayon::current_num_threads().max(1))).max(256);
            return nodes
                .par_chunks(chunk)
                .fold(zero, |mut acc, chunk| {
                    accumulate(&mut acc, chunk);
                    acc
                })
                .reduce(zero, |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                });
        }
    }
    let mut acc = zero();
    accumulate(&mut acc, nodes);
    acc
}

fn polar_fourier_impl(
    desc: &Descriptor,
    b: f64,
    a: f64,
    kmax: u32,
    nr: usize,
    ntheta: usize,
    parallel: bool,
) -> Result<FourierTable> {
    if (b - 0.5 * a).abs() > 1e-12 * a {
        return Err(FzError::Geometry(format!(
            "polar tables require b = a/2; got b = {b}, a = {a}"
        )));
    }
    if kmax == 0 || nr == 0 || ntheta == 0 {
        return Err(FzError::Domain(
            "kmax and quadrature sizes must be positive".into(),
        ));
    }
    let nodes = polar_nodes(desc, b, nr, ntheta);
    let coeffs = polar_table_from_nodes(&nodes, a, kmax, parallel);
    FourierTable::new(a, kmax, TableSource::Polar, coeffs)
}

/// Quadrature Fourier coefficients of a descriptor supported on the disk of
/// radius b = a/2: Gauss-Legendre radially, trapezoid angularly.
pub fn polar_fourier_coeffs(
    desc: &Descriptor,
    b: f64,
    a: f64,
    kmax: u32,
    nr: usize,
    ntheta: usize,
) -> Result<FourierTable> {
    polar_fourier_impl(desc, b, a, kmax, nr, ntheta, true)
}

/// Sequential variant of [`polar_fourier_coeffs`].
pub fn polar_fourier_coeffs_seq(
    desc: &Descriptor,
    b: f64,
    a: f64,
    kmax: u32,
    nr: usize,
    ntheta: usize,
) -> Result<FourierTable> {
    polar_fourier_impl(desc, b, a, kmax, nr, ntheta, false)
}
