//! Fourier tables to Fourier-Zernike coefficient tables, and back to point
//! values.
//!
//! The conversion weight for the disk of radius a is
//!
//!   c_a(k; n, m) = sqrt(n+1) i^m (-1)^((n-m)/2) J_{n+1}(pi |k|)
//!                  / (2 a sqrt(pi) |k|) * e^(-i m Phi(k)),
//!
//! with the k = 0 limit sqrt(pi)/(4a) for (n, m) = (0, 0) and zero
//! otherwise. Coefficient sums run over the truncated box either in flat
//! row-major order or regrouped by polar shell; both orders accumulate with
//! compensated summation and share bitwise-identical summands, so they agree
//! to roughly machine precision.

use num_complex::Complex64;

use crate::basis::{enumerate_indices, FZIndex, Truncation};
use crate::descriptor::Descriptor;
use crate::error::{FzError, Result};
use crate::exec;
use crate::grid::FourierTable;
use crate::lattice::{polar_of, LatticePoint, PolarShell};
use crate::quad::{i_pow, neg_one_pow, ComplexAccumulator, GaussLegendre};
use crate::special;

/// Truncated Fourier-Zernike coefficients C_nm on the disk of radius a, in
/// canonical enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct FZCoeffTable {
    a: f64,
    trunc: Truncation,
    coeffs: Vec<Complex64>,
}

impl FZCoeffTable {
    pub fn new(a: f64, trunc: Truncation, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(a > 0.0) {
            return Err(FzError::Domain(format!(
                "disk radius must be positive, got {a}"
            )));
        }
        if coeffs.len() != trunc.index_count() {
            return Err(FzError::Geometry(format!(
                "expected {} coefficients, got {}",
                trunc.index_count(),
                coeffs.len()
            )));
        }
        Ok(Self { a, trunc, coeffs })
    }

    pub fn zeros(a: f64, trunc: Truncation) -> Self {
        Self {
            a,
            trunc,
            coeffs: vec![Complex64::new(0.0, 0.0); trunc.index_count()],
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn trunc(&self) -> Truncation {
        self.trunc
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn get(&self, idx: FZIndex) -> Complex64 {
        self.coeffs[idx.position()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (FZIndex, Complex64)> + '_ {
        enumerate_indices(self.trunc)
            .into_iter()
            .zip(self.coeffs.iter().copied())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Worst deviation from C(n, -m) = conj(C(n, m)); near zero for
    /// real-valued source functions.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (idx, c) in self.iter() {
            let other = self.get(idx.conjugate());
            worst = worst.max((other - c.conj()).norm());
        }
        worst
    }
}

/// Conversion weight c_a(k; n, m); see the module docs for the formula and
/// the k = 0 limit.
pub fn c_kernel(k: LatticePoint, idx: FZIndex, a: f64) -> Result<Complex64> {
    if !(a > 0.0) {
        return Err(FzError::Domain(format!(
            "disk radius must be positive, got {a}"
        )));
    }
    if k.is_origin() {
        return Ok(c_origin(idx, a));
    }
    let (rho, phi) = polar_of(k);
    let j = special::bessel_j(idx.n() as i32 + 1, std::f64::consts::PI * rho)?;
    Ok(c_from_parts(idx, a, rho, phi, j))
}

/// Assembles c_a(k; n, m) from precomputed radius, angle and Bessel value.
/// All sum paths funnel through this so their summands are bitwise equal.
#[inline]
pub(crate) fn c_from_parts(idx: FZIndex, a: f64, rho: f64, phi: f64, j_np1: f64) -> Complex64 {
    let n = idx.n() as i32;
    let m = idx.m();
    let radial =
        ((idx.n() as f64 + 1.0).sqrt() / (2.0 * a * std::f64::consts::PI.sqrt())) * j_np1 / rho;
    let unit = i_pow(m) * neg_one_pow((n - m) / 2);
    unit * Complex64::from_polar(1.0, -(m as f64) * phi) * radial
}

/// The k = 0 limit of c_a: sqrt(pi)/(4a) at (0, 0), zero elsewhere.
#[inline]
pub(crate) fn c_origin(idx: FZIndex, a: f64) -> Complex64 {
    if idx.n() == 0 && idx.m() == 0 {
        Complex64::new(std::f64::consts::PI.sqrt() / (4.0 * a), 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Per-box-point data for the coefficient sums: polar coordinates and the
/// Bessel ladders J_0 .. J_{n_max+1} at pi*|k| (one ladder per distinct
/// squared radius), shared across indices and across the flat and
/// shell-grouped paths.
pub(crate) struct KernelGrid {
    a: f64,
    kmax: u32,
    stride: usize,
    rho_phi: Vec<(f64, f64)>,
    /// Ladder index per box point.
    ladder_of: Vec<u32>,
    /// Concatenated ladders, `stride` values each.
    ladders: Vec<f64>,
}

impl KernelGrid {
    pub(crate) fn new(a: f64, kmax: u32, n_max: u32, parallel: bool) -> Result<Self> {
        let k = kmax as i32;
        let dim = 2 * kmax as usize + 1;
        let stride = n_max as usize + 2;
        // Squared radii are bounded by 2 kmax^2, so a flat table maps each
        // one to its Bessel ladder; one recurrence per distinct radius.
        let r2_max = 2 * (kmax as usize) * (kmax as usize);
        let mut index_of = vec![u32::MAX; r2_max + 1];
        let mut radii = Vec::new();
        for k1 in 0..=kmax as usize {
            for k2 in k1..=kmax as usize {
                let r2 = k1 * k1 + k2 * k2;
                if index_of[r2] == u32::MAX {
                    index_of[r2] = 0;
                    radii.push(r2);
                }
            }
        }
        radii.sort_unstable();
        for (i, &r2) in radii.iter().enumerate() {
            index_of[r2] = i as u32;
        }
        let rows = exec::map_if(parallel, radii.len(), |i| {
            let rho = (radii[i] as f64).sqrt();
            special::bessel_j_sequence(n_max + 1, std::f64::consts::PI * rho)
                .expect("finite argument")
        });
        let mut ladders = Vec::with_capacity(radii.len() * stride);
        for row in rows {
            ladders.extend_from_slice(&row);
        }

        let rows = exec::map_if(parallel, dim, |row| {
            let k1 = row as i32 - k;
            let mut out = Vec::with_capacity(dim);
            for k2 in -k..=k {
                let p = LatticePoint::new(k1, k2);
                out.push((polar_of(p), index_of[p.r2() as usize]));
            }
            out
        });
        let mut rho_phi = Vec::with_capacity(dim * dim);
        let mut ladder_of = Vec::with_capacity(dim * dim);
        for row in rows {
            for (rp, li) in row {
                rho_phi.push(rp);
                ladder_of.push(li);
            }
        }
        Ok(Self {
            a,
            kmax,
            stride,
            rho_phi,
            ladder_of,
            ladders,
        })
    }

    #[inline]
    pub(crate) fn flat_of(&self, p: LatticePoint) -> usize {
        let dim = 2 * self.kmax as i32 + 1;
        ((p.k1 + self.kmax as i32) * dim + (p.k2 + self.kmax as i32)) as usize
    }

    /// c_a(k; idx) for the box point at flat position `flat`.
    #[inline]
    pub(crate) fn c_at(&self, flat: usize, idx: FZIndex) -> Complex64 {
        let (rho, phi) = self.rho_phi[flat];
        if rho == 0.0 {
            return c_origin(idx, self.a);
        }
        let j = self.ladders[self.ladder_of[flat] as usize * self.stride + idx.n() as usize + 1];
        c_from_parts(idx, self.a, rho, phi, j)
    }
}

/// One coefficient as the flat box sum over precomputed table values.
fn sum_flat(grid: &KernelGrid, values: &[Complex64], idx: FZIndex) -> Complex64 {
    let mut acc = ComplexAccumulator::new();
    for (flat, &v) in values.iter().enumerate() {
        acc.add(grid.c_at(flat, idx) * v);
    }
    acc.value()
}

/// One coefficient summed shell-major (ascending squared radius, ascending
/// angle within a shell); identical summands to [`sum_flat`], reordered.
fn sum_shells(
    grid: &KernelGrid,
    values: &[Complex64],
    shells: &[PolarShell],
    idx: FZIndex,
) -> Complex64 {
    let mut acc = ComplexAccumulator::new();
    for shell in shells {
        for &p in shell.points() {
            let flat = grid.flat_of(p);
            acc.add(grid.c_at(flat, idx) * values[flat]);
        }
    }
    acc.value()
}

fn check_shell_cover(shells: &[PolarShell], kmax: u32) -> Result<()> {
    let dim = 2 * kmax as usize + 1;
    let total: usize = shells.iter().map(|s| s.len()).sum();
    if total != dim * dim {
        return Err(FzError::Geometry(format!(
            "shells hold {total} points, the box needs {}",
            dim * dim
        )));
    }
    for shell in shells {
        for p in shell.points() {
            if p.k1.unsigned_abs() > kmax || p.k2.unsigned_abs() > kmax {
                return Err(FzError::Geometry(format!(
                    "shell point ({}, {}) outside the box of kmax = {kmax}",
                    p.k1, p.k2
                )));
            }
        }
    }
    Ok(())
}

fn transform_values(
    a: f64,
    kmax: u32,
    values: &[Complex64],
    trunc: Truncation,
    shells: Option<&[PolarShell]>,
    parallel: bool,
) -> Result<FZCoeffTable> {
    if let Some(shells) = shells {
        check_shell_cover(shells, kmax)?;
    }
    let grid = KernelGrid::new(a, kmax, trunc.n_max(), parallel)?;
    let indices = enumerate_indices(trunc);
    let coeffs = exec::map_if(parallel, indices.len(), |i| match shells {
        None => sum_flat(&grid, values, indices[i]),
        Some(shells) => sum_shells(&grid, values, shells, indices[i]),
    });
    FZCoeffTable::new(a, trunc, coeffs)
}

/// Fourier-Zernike coefficients from a lattice Fourier table: for each
/// index, the box-truncated sum of c_a(k; n, m) f_hat(k) in flat order.
pub fn fz_from_fourier(table: &FourierTable, trunc: Truncation) -> Result<FZCoeffTable> {
    transform_values(table.a(), table.kmax(), table.flat(), trunc, None, true)
}

/// Sequential variant of [`fz_from_fourier`].
pub fn fz_from_fourier_seq(table: &FourierTable, trunc: Truncation) -> Result<FZCoeffTable> {
    transform_values(table.a(), table.kmax(), table.flat(), trunc, None, false)
}

/// Same sum regrouped by polar shell; the shells must cover the table's box
/// exactly.
pub fn fz_from_fourier_polar(
    table: &FourierTable,
    shells: &[PolarShell],
    trunc: Truncation,
) -> Result<FZCoeffTable> {
    transform_values(
        table.a(),
        table.kmax(),
        table.flat(),
        trunc,
        Some(shells),
        true,
    )
}

/// Sequential variant of [`fz_from_fourier_polar`].
pub fn fz_from_fourier_polar_seq(
    table: &FourierTable,
    shells: &[PolarShell],
    trunc: Truncation,
) -> Result<FZCoeffTable> {
    transform_values(
        table.a(),
        table.kmax(),
        table.flat(),
        trunc,
        Some(shells),
        false,
    )
}

pub(crate) fn transform_product_values(
    a: f64,
    kmax: u32,
    values: &[Complex64],
    trunc: Truncation,
    shells: Option<&[PolarShell]>,
    parallel: bool,
) -> Result<FZCoeffTable> {
    transform_values(a, kmax, values, trunc, shells, parallel)
}

fn fz_direct_impl(
    desc: &Descriptor,
    a: f64,
    support: f64,
    trunc: Truncation,
    nr: usize,
    ntheta: usize,
    parallel: bool,
) -> Result<FZCoeffTable> {
    if !(a > 0.0) || !(support > 0.0) || support > a {
        return Err(FzError::Domain(format!(
            "need 0 < support <= a; got support = {support}, a = {a}"
        )));
    }
    if nr == 0 || ntheta == 0 {
        return Err(FzError::Domain("quadrature sizes must be positive".into()));
    }
    let n_max = trunc.n_max();
    let rule = GaussLegendre::new(nr);
    let radial: Vec<(f64, f64)> = rule.scaled(0.0, support);
    let wt = std::f64::consts::TAU / ntheta as f64;
    let m_count = 2 * n_max as usize + 1;

    // Angular sums G(i, m) = sum_j f(r_i, theta_j) e^(-im theta_j) wt,
    // one row per radial node.
    let g_rows = exec::map_if(parallel, radial.len(), |i| {
        let r = radial[i].0;
        let mut row = vec![Complex64::new(0.0, 0.0); m_count];
        for j in 0..ntheta {
            let theta = j as f64 * std::f64::consts::TAU / ntheta as f64;
            let f = desc.eval(r * theta.cos(), r * theta.sin(), support) * wt;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            let e = Complex64::from_polar(1.0, -theta);
            // phase runs e^(+i n_max theta) down to e^(-i n_max theta).
            let mut phase = Complex64::from_polar(1.0, n_max as f64 * theta);
            for slot in row.iter_mut() {
                *slot += f * phase;
                phase *= e;
            }
        }
        row
    });

    let indices = enumerate_indices(trunc);
    let coeffs = exec::map_if(parallel, indices.len(), |pos| {
        let idx = indices[pos];
        let m_abs = idx.m().unsigned_abs();
        let zc = special::zernike_signed_coeffs(idx.n(), m_abs);
        let m_slot = (idx.m() + n_max as i32) as usize;
        let norm = ((idx.n() as f64 + 1.0) / std::f64::consts::PI).sqrt() / a;
        let mut acc = ComplexAccumulator::new();
        for (i, &(r, wr)) in radial.iter().enumerate() {
            let z = special::zernike_eval_coeffs(&zc, m_abs, r / a);
            acc.add(g_rows[i][m_slot] * (z * wr * r));
        }
        acc.value() * norm
    });
    FZCoeffTable::new(a, trunc, coeffs)
}

/// Definitional coefficients by Gauss-Legendre x trapezoid quadrature of
/// f conj(V_nm) r over the disk; the independent oracle for the transform
/// paths.
pub fn fz_direct(
    desc: &Descriptor,
    a: f64,
    support: f64,
    trunc: Truncation,
    nr: usize,
    ntheta: usize,
) -> Result<FZCoeffTable> {
    fz_direct_impl(desc, a, support, trunc, nr, ntheta, true)
}

/// Sequential variant of [`fz_direct`].
pub fn fz_direct_seq(
    desc: &Descriptor,
    a: f64,
    support: f64,
    trunc: Truncation,
    nr: usize,
    ntheta: usize,
) -> Result<FZCoeffTable> {
    fz_direct_impl(desc, a, support, trunc, nr, ntheta, false)
}

fn reconstruct_impl(
    ctable: &FZCoeffTable,
    points: &[(f64, f64)],
    parallel: bool,
) -> Result<Vec<Complex64>> {
    let a = ctable.a();
    for &(r, _) in points {
        if !(0.0..=a).contains(&r) {
            return Err(FzError::Domain(format!(
                "point radius {r} outside [0, {a}]"
            )));
        }
    }
    let trunc = ctable.trunc();
    let n_max = trunc.n_max();
    let indices = enumerate_indices(trunc);
    let zcoeffs: Vec<Vec<f64>> = indices
        .iter()
        .map(|idx| special::zernike_signed_coeffs(idx.n(), idx.m().unsigned_abs()))
        .collect();

    Ok(exec::map_if(parallel, points.len(), |p| {
        let (r, theta) = points[p];
        // e^(im theta) for m = -n_max ..= n_max.
        let e = Complex64::from_polar(1.0, theta);
        let mut phases = vec![Complex64::new(1.0, 0.0); 2 * n_max as usize + 1];
        let mut cur = Complex64::new(1.0, 0.0);
        for m in 1..=n_max as usize {
            cur *= e;
            phases[n_max as usize + m] = cur;
            phases[n_max as usize - m] = cur.conj();
        }
        let mut acc = ComplexAccumulator::new();
        for (i, idx) in indices.iter().enumerate() {
            let c = ctable.coeffs()[i];
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let m_abs = idx.m().unsigned_abs();
            let z = special::zernike_eval_coeffs(&zcoeffs[i], m_abs, r / a);
            let norm = ((idx.n() as f64 + 1.0) / std::f64::consts::PI).sqrt() / a;
            acc.add(c * phases[(idx.m() + n_max as i32) as usize] * (norm * z));
        }
        acc.value()
    }))
}

/// Partial sum of the series at polar points (r, theta); every r must lie
/// in [0, a].
pub fn reconstruct(ctable: &FZCoeffTable, points: &[(f64, f64)]) -> Result<Vec<Complex64>> {
    reconstruct_impl(ctable, points, true)
}

/// Sequential variant of [`reconstruct`].
pub fn reconstruct_seq(ctable: &FZCoeffTable, points: &[(f64, f64)]) -> Result<Vec<Complex64>> {
    reconstruct_impl(ctable, points, false)
}
