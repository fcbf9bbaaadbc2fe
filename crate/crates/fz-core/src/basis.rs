//! Fourier-Zernike index bookkeeping and basis-element evaluation.
//!
//! Valid indices are pairs (n, m) with |m| <= n and n - |m| even. Tables are
//! laid out in the canonical order: ascending n, then m ascending over
//! {-n, -n+2, ..., n}, which makes coefficient files byte-reproducible.

use num_complex::Complex64;

use crate::error::{FzError, Result};
use crate::quad::{i_pow, neg_one_pow};
use crate::special;

/// A validated Fourier-Zernike index pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FZIndex {
    n: u32,
    m: i32,
}

impl FZIndex {
    pub fn new(n: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > n || (n - m.unsigned_abs()) % 2 != 0 {
            return Err(FzError::InvalidIndex(format!(
                "(n, m) = ({n}, {m}) violates |m| <= n with matching parity"
            )));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    /// Index with the angular order negated; evaluates to the conjugate basis
    /// element.
    pub fn conjugate(&self) -> Self {
        Self {
            n: self.n,
            m: -self.m,
        }
    }

    /// Position of this index in the canonical enumeration.
    pub fn position(&self) -> usize {
        let n = self.n as usize;
        n * (n + 1) / 2 + ((self.m + self.n as i32) / 2) as usize
    }
}

impl std::fmt::Display for FZIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.n, self.m)
    }
}

/// Truncation of the double series at a maximum Zernike degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    n_max: u32,
}

impl Truncation {
    pub fn new(n_max: u32) -> Result<Self> {
        if n_max > special::MAX_DEGREE {
            return Err(FzError::InvalidIndex(format!(
                "n_max = {n_max} exceeds the supported ceiling {}",
                special::MAX_DEGREE
            )));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// Number of retained indices: (n_max+1)(n_max+2)/2.
    pub fn index_count(&self) -> usize {
        let n = self.n_max as usize;
        (n + 1) * (n + 2) / 2
    }

    pub fn contains(&self, idx: FZIndex) -> bool {
        idx.n <= self.n_max
    }
}

/// All valid indices with n <= n_max in canonical order.
pub fn enumerate_indices(trunc: Truncation) -> Vec<FZIndex> {
    let mut out = Vec::with_capacity(trunc.index_count());
    for n in 0..=trunc.n_max {
        let mut m = -(n as i32);
        while m <= n as i32 {
            out.push(FZIndex { n, m });
            m += 2;
        }
    }
    out
}

/// Basis element V_nm on the disk of radius `a`:
/// a^-1 sqrt((n+1)/pi) Z_nm(r/a) e^(im theta).
pub fn basis_eval(idx: FZIndex, a: f64, r: f64, theta: f64) -> Result<Complex64> {
    if !(a > 0.0) {
        return Err(FzError::Domain(format!(
            "disk radius must be positive, got {a}"
        )));
    }
    if !(0.0..=a).contains(&r) {
        return Err(FzError::Domain(format!(
            "r = {r} outside the disk of radius {a}"
        )));
    }
    let z = special::zernike_radial(idx.n, idx.m, r / a)?;
    let norm = ((idx.n as f64 + 1.0) / std::f64::consts::PI).sqrt() / a;
    Ok(norm * z * Complex64::from_polar(1.0, idx.m as f64 * theta))
}

/// Inner product of the plane wave e^(i rfreq s cos(alpha - theta)) with
/// conj(V_nm) over the disk of radius `a`:
/// 2 sqrt(pi (n+1)) i^m (-1)^((n-m)/2) J_{n+1}(a rfreq) / rfreq * e^(-im alpha).
///
/// The radial frequency must be nonzero; the rfreq -> 0 limit is
/// [`dc_basis_integral`].
pub fn plane_wave_basis_inner(idx: FZIndex, a: f64, rfreq: f64, alpha: f64) -> Result<Complex64> {
    if rfreq == 0.0 {
        return Err(FzError::Domain(
            "rfreq = 0 has no closed form here; use dc_basis_integral".into(),
        ));
    }
    let n = idx.n as i32;
    let scale = 2.0 * (std::f64::consts::PI * (idx.n as f64 + 1.0)).sqrt();
    let sign = neg_one_pow((n - idx.m) / 2);
    let bessel = special::bessel_j(n + 1, a * rfreq)?;
    let phase = Complex64::from_polar(1.0, -(idx.m as f64) * alpha);
    Ok(scale * sign * bessel / rfreq * i_pow(idx.m) * phase)
}

/// Integral of conj(V_nm) against the constant 1 over the disk of radius
/// `a`; nonzero only for (0, 0) where it equals a sqrt(pi).
pub fn dc_basis_integral(idx: FZIndex, a: f64) -> Complex64 {
    if idx.n == 0 && idx.m == 0 {
        Complex64::new(a * std::f64::consts::PI.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}
