//! Pre-computed convolution kernels for coefficient-space convolution.
//!
//! A basis element of the half-radius disk, zero-padded to the square, has
//! the closed-form Fourier table
//!
//!   vhat_nm(k) = 2 sqrt(n+1) i^(-m) e^(i m Phi(k)) a (-1)^((n-m)/2)
//!                J_{n+1}(pi |k| / 2) / (sqrt(pi) |k|),
//!
//! with the k = 0 limit a sqrt(pi)/2 for (0, 0) and zero otherwise. The
//! coefficients of V_nm (*) V_n'm' on the outer disk are then kernel sums of
//! c_a * vhat * vhat over the box, and convolution of two coefficient-
//! represented functions is a bilinear combination of such kernel tables.
//!
//! The angular factor e^(i(m+m')Phi(k)) forces the output order to
//! l = m + m'; tables are built on that selection rule, with the non-
//! selected entries exactly zero.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::basis::{enumerate_indices, FZIndex, Truncation};
use crate::error::{FzError, Result};
use crate::exec;
use crate::lattice::{polar_of, LatticePoint};
use crate::quad::{i_pow, neg_one_pow, ComplexAccumulator};
use crate::special;

/// Closed-form Fourier table entry of the zero-padded basis element V_nm of
/// the disk of radius b = a/2, at lattice point k.
pub fn vhat_closed_form(idx: FZIndex, k: LatticePoint, a: f64) -> Result<Complex64> {
    if !(a > 0.0) {
        return Err(FzError::Domain(format!(
            "half-width must be positive, got {a}"
        )));
    }
    if k.is_origin() {
        return Ok(if idx.n() == 0 && idx.m() == 0 {
            Complex64::new(a * std::f64::consts::PI.sqrt() / 2.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        });
    }
    let (rho, phi) = polar_of(k);
    let j = special::bessel_j(idx.n() as i32 + 1, std::f64::consts::PI * rho / 2.0)?;
    Ok(vhat_from_parts(idx, a, rho, phi, j))
}

#[inline]
fn vhat_from_parts(idx: FZIndex, a: f64, rho: f64, phi: f64, j_np1_half: f64) -> Complex64 {
    let n = idx.n() as i32;
    let m = idx.m();
    let radial =
        2.0 * (idx.n() as f64 + 1.0).sqrt() * a / std::f64::consts::PI.sqrt() * j_np1_half / rho;
    let unit = i_pow(-m) * neg_one_pow((n - m) / 2);
    unit * Complex64::from_polar(1.0, m as f64 * phi) * radial
}

/// Coefficients on the outer disk of the windowed convolution of two basis
/// elements of the half-radius disk.
#[derive(Debug, Clone)]
pub struct KernelTable {
    a: f64,
    kmax: u32,
    left: FZIndex,
    right: FZIndex,
    trunc: Truncation,
    coeffs: Vec<Complex64>,
}

impl KernelTable {
    pub fn new(
        a: f64,
        kmax: u32,
        left: FZIndex,
        right: FZIndex,
        trunc: Truncation,
        coeffs: Vec<Complex64>,
    ) -> Result<Self> {
        if coeffs.len() != trunc.index_count() {
            return Err(FzError::Geometry(format!(
                "expected {} kernel coefficients, got {}",
                trunc.index_count(),
                coeffs.len()
            )));
        }
        Ok(Self {
            a,
            kmax,
            left,
            right,
            trunc,
            coeffs,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn kmax(&self) -> u32 {
        self.kmax
    }

    pub fn left(&self) -> FZIndex {
        self.left
    }

    pub fn right(&self) -> FZIndex {
        self.right
    }

    pub fn trunc(&self) -> Truncation {
        self.trunc
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn get(&self, out: FZIndex) -> Complex64 {
        self.coeffs[out.position()]
    }
}

/// Per-box-point data shared by every kernel pair at fixed (a, kmax, trunc):
/// polar coordinates plus both Bessel ladders (J at pi*rho and at pi*rho/2),
/// one pair of ladders per distinct squared radius.
struct KernelWorkspace {
    a: f64,
    kmax: u32,
    stride: usize,
    rho_phi: Vec<(f64, f64)>,
    ladder_of: Vec<u32>,
    j_full: Vec<f64>,
    j_half: Vec<f64>,
}

impl KernelWorkspace {
    fn new(a: f64, kmax: u32, n_max: u32) -> Self {
        let k = kmax as i32;
        let stride = n_max as usize + 2;
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
        let rows = exec::map(radii.len(), |i| {
            let rho = (radii[i] as f64).sqrt();
            let full = special::bessel_j_sequence(n_max + 1, std::f64::consts::PI * rho)
                .expect("finite argument");
            let half = special::bessel_j_sequence(n_max + 1, std::f64::consts::PI * rho / 2.0)
                .expect("finite argument");
            (full, half)
        });
        let mut j_full = Vec::with_capacity(radii.len() * stride);
        let mut j_half = Vec::with_capacity(radii.len() * stride);
        for (full, half) in rows {
            j_full.extend_from_slice(&full);
            j_half.extend_from_slice(&half);
        }

        let dim = 2 * kmax as usize + 1;
        let mut rho_phi = Vec::with_capacity(dim * dim);
        let mut ladder_of = Vec::with_capacity(dim * dim);
        for k1 in -k..=k {
            for k2 in -k..=k {
                let p = LatticePoint::new(k1, k2);
                rho_phi.push(polar_of(p));
                ladder_of.push(index_of[p.r2() as usize]);
            }
        }
        Self {
            a,
            kmax,
            stride,
            rho_phi,
            ladder_of,
            j_full,
            j_half,
        }
    }

    fn c_at(&self, flat: usize, idx: FZIndex) -> Complex64 {
        let (rho, phi) = self.rho_phi[flat];
        if rho == 0.0 {
            return crate::transform::c_origin(idx, self.a);
        }
        let j = self.j_full[self.ladder_of[flat] as usize * self.stride + idx.n() as usize + 1];
        crate::transform::c_from_parts(idx, self.a, rho, phi, j)
    }

    fn vhat_at(&self, flat: usize, idx: FZIndex) -> Complex64 {
        let (rho, phi) = self.rho_phi[flat];
        if rho == 0.0 {
            return if idx.n() == 0 && idx.m() == 0 {
                Complex64::new(self.a * std::f64::consts::PI.sqrt() / 2.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        let j = self.j_half[self.ladder_of[flat] as usize * self.stride + idx.n() as usize + 1];
        vhat_from_parts(idx, self.a, rho, phi, j)
    }

    fn table_for(&self, left: FZIndex, right: FZIndex, trunc: Truncation) -> KernelTable {
        let m_out = left.m() + right.m();
        let outs: Vec<FZIndex> = enumerate_indices(trunc)
            .into_iter()
            .filter(|o| o.m() == m_out)
            .collect();
        let dim = 2 * self.kmax as usize + 1;
        let mut accs: Vec<ComplexAccumulator> = vec![ComplexAccumulator::new(); outs.len()];
        for flat in 0..dim * dim {
            let w = self.vhat_at(flat, left) * self.vhat_at(flat, right);
            if w.norm_sqr() == 0.0 {
                continue;
            }
            for (o, acc) in outs.iter().zip(accs.iter_mut()) {
                acc.add(self.c_at(flat, *o) * w);
            }
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); trunc.index_count()];
        for (o, acc) in outs.iter().zip(&accs) {
            coeffs[o.position()] = acc.value();
        }
        KernelTable {
            a: self.a,
            kmax: self.kmax,
            left,
            right,
            trunc,
            coeffs,
        }
    }
}

/// Builds the kernel table for one index pair by the box sum of
/// c_a(k; out) vhat_left(k) vhat_right(k), restricted to the output orders
/// the angular selection rule allows.
pub fn kernel_coeff_table(
    left: FZIndex,
    right: FZIndex,
    a: f64,
    kmax: u32,
    trunc: Truncation,
) -> Result<KernelTable> {
    if !(a > 0.0) || kmax == 0 {
        return Err(FzError::Domain("need a > 0 and kmax >= 1".into()));
    }
    let ws = KernelWorkspace::new(a, kmax, trunc.n_max().max(left.n()).max(right.n()));
    Ok(ws.table_for(left, right, trunc))
}

/// Disk-backed, lazily-built store of kernel tables at fixed (a, kmax,
/// trunc). Tables are cached in memory and written to the cache directory as
/// coefficient JSON; writes are serialized, lookups clone an Arc.
pub struct KernelStore {
    dir: Option<PathBuf>,
    a: f64,
    kmax: u32,
    trunc: Truncation,
    cache: Mutex<HashMap<(FZIndex, FZIndex), Arc<KernelTable>>>,
}

impl KernelStore {
    /// In-memory store without a cache directory.
    pub fn in_memory(a: f64, kmax: u32, trunc: Truncation) -> Self {
        Self {
            dir: None,
            a,
            kmax,
            trunc,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Store backed by JSON files under `dir` (created if missing).
    pub fn on_disk(dir: PathBuf, a: f64, kmax: u32, trunc: Truncation) -> Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir: Some(dir),
            a,
            kmax,
            trunc,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn kmax(&self) -> u32 {
        self.kmax
    }

    pub fn trunc(&self) -> Truncation {
        self.trunc
    }

    fn file_name(&self, left: FZIndex, right: FZIndex) -> String {
        format!(
            "kernel_a{}_n{}m{}_n{}m{}.json",
            self.a,
            left.n(),
            left.m(),
            right.n(),
            right.m()
        )
    }

    /// Fetches a kernel table, consulting the memory cache, then the disk
    /// cache, then building (and persisting) it.
    pub fn get_or_build(&self, left: FZIndex, right: FZIndex) -> Result<Arc<KernelTable>> {
        if let Some(hit) = self.cache.lock().unwrap().get(&(left, right)) {
            return Ok(hit.clone());
        }
        if let Some(dir) = &self.dir {
            let path = dir.join(self.file_name(left, right));
            if path.is_file() {
                if let Ok(table) = crate::io::read_kernel_json(&path) {
                    if table.a() == self.a
                        && table.kmax() == self.kmax
                        && table.trunc() == self.trunc
                        && table.left() == left
                        && table.right() == right
                    {
                        let arc = Arc::new(table);
                        self.cache
                            .lock()
                            .unwrap()
                            .insert((left, right), arc.clone());
                        return Ok(arc);
                    }
                }
                // Stale or foreign file: rebuild and overwrite below.
            }
        }
        let table = kernel_coeff_table(left, right, self.a, self.kmax, self.trunc)?;
        if let Some(dir) = &self.dir {
            crate::io::write_kernel_json(&dir.join(self.file_name(left, right)), &table)?;
        }
        let arc = Arc::new(table);
        self.cache
            .lock()
            .unwrap()
            .insert((left, right), arc.clone());
        Ok(arc)
    }

    /// Builds every pair over the input truncation; pairs are independent
    /// and built in parallel when the feature allows.
    pub fn build_all(&self, input_trunc: Truncation) -> Result<()> {
        let indices = enumerate_indices(input_trunc);
        let ws = KernelWorkspace::new(
            self.a,
            self.kmax,
            self.trunc.n_max().max(input_trunc.n_max()),
        );
        let pairs: Vec<(FZIndex, FZIndex)> = indices
            .iter()
            .flat_map(|&l| indices.iter().map(move |&r| (l, r)))
            .collect();
        let missing: Vec<(FZIndex, FZIndex)> = {
            let cache = self.cache.lock().unwrap();
            pairs
                .into_iter()
                .filter(|p| !cache.contains_key(p))
                .collect()
        };
        let built = exec::map(missing.len(), |i| {
            let (l, r) = missing[i];
            ws.table_for(l, r, self.trunc)
        });
        for ((l, r), table) in missing.into_iter().zip(built) {
            if let Some(dir) = &self.dir {
                let path = dir.join(self.file_name(l, r));
                if !path.is_file() {
                    crate::io::write_kernel_json(&path, &table)?;
                }
            }
            self.cache.lock().unwrap().insert((l, r), Arc::new(table));
        }
        Ok(())
    }
}

fn convolve_via_kernels_impl(
    c1: &crate::transform::FZCoeffTable,
    c2: &crate::transform::FZCoeffTable,
    store: &KernelStore,
    trunc: Truncation,
    parallel: bool,
) -> Result<crate::transform::FZCoeffTable> {
    if c1.trunc() != c2.trunc() {
        return Err(FzError::Geometry(format!(
            "input truncations differ: {} vs {}",
            c1.trunc().n_max(),
            c2.trunc().n_max()
        )));
    }
    if c1.a() != c2.a() {
        return Err(FzError::Geometry(format!(
            "input disk radii differ: {} vs {}",
            c1.a(),
            c2.a()
        )));
    }
    if (c1.a() - store.a() / 2.0).abs() > 1e-12 * store.a() {
        return Err(FzError::Geometry(format!(
            "inputs live on radius {}, the kernel store expects {}",
            c1.a(),
            store.a() / 2.0
        )));
    }
    if trunc != store.trunc() {
        return Err(FzError::Geometry(format!(
            "output truncation {} does not match the store's {}",
            trunc.n_max(),
            store.trunc().n_max()
        )));
    }
    let in_indices = enumerate_indices(c1.trunc());
    store.build_all(c1.trunc())?;
    let mut tables = Vec::with_capacity(in_indices.len() * in_indices.len());
    for &l in &in_indices {
        for &r in &in_indices {
            tables.push(store.get_or_build(l, r)?);
        }
    }

    let out_count = trunc.index_count();
    let coeffs = exec::map_if(parallel, out_count, |pos| {
        let mut acc = ComplexAccumulator::new();
        for (pi, table) in tables.iter().enumerate() {
            let k = table.coeffs()[pos];
            if k.norm_sqr() == 0.0 {
                continue;
            }
            let (li, ri) = (pi / in_indices.len(), pi % in_indices.len());
            acc.add(c1.coeffs()[li] * c2.coeffs()[ri] * k);
        }
        acc.value()
    });
    crate::transform::FZCoeffTable::new(store.a(), trunc, coeffs)
}

/// Convolution of two coefficient-represented functions on the half-radius
/// disk through pre-computed kernels: the bilinear combination
/// sum over pairs of C1 C2 * kernel(left, right).
pub fn convolve_via_kernels(
    c1: &crate::transform::FZCoeffTable,
    c2: &crate::transform::FZCoeffTable,
    store: &KernelStore,
    trunc: Truncation,
) -> Result<crate::transform::FZCoeffTable> {
    convolve_via_kernels_impl(c1, c2, store, trunc, true)
}

/// Sequential variant of [`convolve_via_kernels`].
pub fn convolve_via_kernels_seq(
    c1: &crate::transform::FZCoeffTable,
    c2: &crate::transform::FZCoeffTable,
    store: &KernelStore,
    trunc: Truncation,
) -> Result<crate::transform::FZCoeffTable> {
    convolve_via_kernels_impl(c1, c2, store, trunc, false)
}
