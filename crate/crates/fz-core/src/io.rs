//! On-disk formats.
//!
//! * `FZG1` grids — binary, little-endian: magic `FZG1`, f64 half-width,
//!   f64 support radius, u32 samples per axis, then N^2 complex128 values
//!   row-major with x1 fastest.
//! * Coefficient JSON — `{"a": .., "n_max": .., "coeffs": [{"n", "m", "re",
//!   "im"}, ...]}` in canonical enumeration order; floats carry 17
//!   significant digits so values round-trip bit-exactly.
//! * Kernel JSON — the coefficient layout plus `kmax`, `left`, `right`.
//! * P5 PGM rendering of a grid's real part with an affine [min, max] ->
//!   [0, 255] mapping recorded in a text sidecar.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::basis::{enumerate_indices, FZIndex, Truncation};
use crate::error::{FzError, Result};
use crate::grid::GridFunction;
use crate::kernels::KernelTable;
use crate::transform::FZCoeffTable;

const GRID_MAGIC: &[u8; 4] = b"FZG1";

/// Formats a float with 17 significant digits (bit-exact round trip).
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_grid(path: &Path, g: &GridFunction) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(GRID_MAGIC)?;
    w.write_all(&g.a().to_le_bytes())?;
    w.write_all(&g.support_radius().to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    for v in g.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<GridFunction> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| FzError::Format(format!("{}: truncated header", path.display())))?;
    if &magic != GRID_MAGIC {
        return Err(FzError::Format(format!(
            "{}: bad magic {:?}, expected \"FZG1\"",
            path.display(),
            magic
        )));
    }
    let mut f8 = [0u8; 8];
    let mut f4 = [0u8; 4];
    r.read_exact(&mut f8)
        .map_err(|_| FzError::Format(format!("{}: truncated header", path.display())))?;
    let a = f64::from_le_bytes(f8);
    r.read_exact(&mut f8)
        .map_err(|_| FzError::Format(format!("{}: truncated header", path.display())))?;
    let support = f64::from_le_bytes(f8);
    r.read_exact(&mut f4)
        .map_err(|_| FzError::Format(format!("{}: truncated header", path.display())))?;
    let n = u32::from_le_bytes(f4) as usize;
    if n == 0 || n > 1 << 16 || !n.is_power_of_two() {
        return Err(FzError::Format(format!(
            "{}: implausible N = {n}",
            path.display()
        )));
    }
    let mut values = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        r.read_exact(&mut f8)
            .map_err(|_| FzError::Format(format!("{}: truncated values", path.display())))?;
        let re = f64::from_le_bytes(f8);
        r.read_exact(&mut f8)
            .map_err(|_| FzError::Format(format!("{}: truncated values", path.display())))?;
        let im = f64::from_le_bytes(f8);
        values.push(Complex64::new(re, im));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(FzError::Format(format!(
            "{}: trailing bytes",
            path.display()
        )));
    }
    GridFunction::from_values(a, n, support, values)
        .map_err(|e| FzError::Format(format!("{}: {e}", path.display())))
}

/// CSV export with header `x1,x2,re,im`, cells in row-major order (x1
/// fastest).
pub fn write_grid_csv(path: &Path, g: &GridFunction) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "x1,x2,re,im")?;
    for i2 in 0..g.n() {
        for i1 in 0..g.n() {
            let v = g.value(i1, i2);
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(g.coord(i1)),
                fmt_f64(g.coord(i2)),
                fmt_f64(v.re),
                fmt_f64(v.im)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn coeffs_json_body(a: f64, trunc: Truncation, coeffs: &[Complex64]) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"a\": {},\n", fmt_f64(a)));
    out.push_str(&format!("  \"n_max\": {},\n", trunc.n_max()));
    out.push_str("  \"coeffs\": [\n");
    let indices = enumerate_indices(trunc);
    for (i, (idx, c)) in indices.iter().zip(coeffs).enumerate() {
        let sep = if i + 1 == coeffs.len() { "" } else { "," };
        out.push_str(&format!(
            "    {{\"n\": {}, \"m\": {}, \"re\": {}, \"im\": {}}}{}\n",
            idx.n(),
            idx.m(),
            fmt_f64(c.re),
            fmt_f64(c.im),
            sep
        ));
    }
    out.push_str("  ]\n");
    out
}

/// Serializes a coefficient table in canonical order.
pub fn coeffs_to_json(table: &FZCoeffTable) -> String {
    let mut s = coeffs_json_body(table.a(), table.trunc(), table.coeffs());
    s.push_str("}\n");
    s
}

pub fn write_coeffs_json(path: &Path, table: &FZCoeffTable) -> Result<()> {
    std::fs::write(path, coeffs_to_json(table))?;
    Ok(())
}

#[derive(Deserialize)]
struct CoeffEntryJson {
    n: u32,
    m: i32,
    re: f64,
    im: f64,
}

#[derive(Deserialize)]
struct CoeffFileJson {
    a: f64,
    n_max: u32,
    coeffs: Vec<CoeffEntryJson>,
    #[serde(default)]
    kmax: Option<u32>,
    #[serde(default)]
    left: Option<IndexJson>,
    #[serde(default)]
    right: Option<IndexJson>,
}

#[derive(Deserialize)]
struct IndexJson {
    n: u32,
    m: i32,
}

fn parse_coeff_file(path: &Path) -> Result<CoeffFileJson> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| FzError::Format(format!("{}: {e}", path.display())))
}

fn entries_in_canonical_order(file: &CoeffFileJson, path: &Path) -> Result<Vec<Complex64>> {
    let trunc = Truncation::new(file.n_max)
        .map_err(|e| FzError::Format(format!("{}: {e}", path.display())))?;
    let indices = enumerate_indices(trunc);
    if file.coeffs.len() != indices.len() {
        return Err(FzError::Format(format!(
            "{}: expected {} coefficients for n_max = {}, found {}",
            path.display(),
            indices.len(),
            file.n_max,
            file.coeffs.len()
        )));
    }
    for (idx, entry) in indices.iter().zip(&file.coeffs) {
        if idx.n() != entry.n || idx.m() != entry.m {
            return Err(FzError::Format(format!(
                "{}: coefficients out of canonical order at ({}, {})",
                path.display(),
                entry.n,
                entry.m
            )));
        }
    }
    Ok(file
        .coeffs
        .iter()
        .map(|e| Complex64::new(e.re, e.im))
        .collect())
}

pub fn read_coeffs_json(path: &Path) -> Result<FZCoeffTable> {
    let file = parse_coeff_file(path)?;
    let coeffs = entries_in_canonical_order(&file, path)?;
    let trunc = Truncation::new(file.n_max).expect("validated above");
    FZCoeffTable::new(file.a, trunc, coeffs)
        .map_err(|e| FzError::Format(format!("{}: {e}", path.display())))
}

/// Kernel cache file: coefficient layout plus kmax and the index pair.
pub fn write_kernel_json(path: &Path, table: &KernelTable) -> Result<()> {
    let mut out = coeffs_json_body(table.a(), table.trunc(), table.coeffs());
    out.pop();
    out.push_str(&format!(",\n  \"kmax\": {},\n", table.kmax()));
    out.push_str(&format!(
        "  \"left\": {{\"n\": {}, \"m\": {}}},\n",
        table.left().n(),
        table.left().m()
    ));
    out.push_str(&format!(
        "  \"right\": {{\"n\": {}, \"m\": {}}}\n",
        table.right().n(),
        table.right().m()
    ));
    out.push_str("}\n");
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_kernel_json(path: &Path) -> Result<KernelTable> {
    let file = parse_coeff_file(path)?;
    let coeffs = entries_in_canonical_order(&file, path)?;
    let trunc = Truncation::new(file.n_max).expect("validated above");
    let missing = || FzError::Format(format!("{}: missing kernel metadata", path.display()));
    let kmax = file.kmax.ok_or_else(missing)?;
    let left = file.left.as_ref().ok_or_else(missing)?;
    let right = file.right.as_ref().ok_or_else(missing)?;
    let left = FZIndex::new(left.n, left.m)
        .map_err(|e| FzError::Format(format!("{}: {e}", path.display())))?;
    let right = FZIndex::new(right.n, right.m)
        .map_err(|e| FzError::Format(format!("{}: {e}", path.display())))?;
    KernelTable::new(file.a, kmax, left, right, trunc, coeffs)
        .map_err(|e| FzError::Format(format!("{}: {e}", path.display())))
}

/// 8-bit P5 rendering of the grid's real part. Returns the (min, max)
/// mapping; a zero-range grid maps to the constant 128 by convention.
pub fn write_pgm(path: &Path, g: &GridFunction) -> Result<(f64, f64)> {
    let n = g.n();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in g.values() {
        lo = lo.min(v.re);
        hi = hi.max(v.re);
    }
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write!(w, "P5\n{n} {n}\n255\n")?;
    let degenerate = !(hi > lo);
    let scale = if degenerate { 0.0 } else { 255.0 / (hi - lo) };
    // Image rows run top to bottom: descending x2 so +x2 points up.
    for i2 in (0..n).rev() {
        let mut row = Vec::with_capacity(n);
        for i1 in 0..n {
            let byte = if degenerate {
                128u8
            } else {
                ((g.value(i1, i2).re - lo) * scale)
                    .round()
                    .clamp(0.0, 255.0) as u8
            };
            row.push(byte);
        }
        w.write_all(&row)?;
    }
    w.flush()?;
    Ok((lo, hi))
}

/// Text sidecar recording the PGM value mapping.
pub fn write_pgm_sidecar(path: &Path, g: &GridFunction, lo: f64, hi: f64) -> Result<()> {
    let body = if hi > lo {
        format!(
            "source: real part of grid values\nn: {}\na: {}\nmin: {}\nmax: {}\nmapping: byte = round(255 * (re - min) / (max - min))\nrows: top row is x2 = +a side, descending\n",
            g.n(),
            fmt_f64(g.a()),
            fmt_f64(lo),
            fmt_f64(hi)
        )
    } else {
        format!(
            "source: real part of grid values\nn: {}\na: {}\nmin: {}\nmax: {}\nmapping: constant 128 (degenerate range)\nrows: top row is x2 = +a side, descending\n",
            g.n(),
            fmt_f64(g.a()),
            fmt_f64(lo),
            fmt_f64(hi)
        )
    };
    std::fs::write(path, body)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::Descriptor;
    use crate::grid::sample_function;
    use crate::transform::fz_direct;
    use proptest::prelude::*;

    #[test]
    fn grid_round_trip_is_exact() {
        let d = Descriptor::parse("gauss_bump:0.2,0.1,-0.05").unwrap();
        let g = sample_function(&d, 1.5, 32, 0.7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.fzg");
        write_grid(&path, &g).unwrap();
        let back = read_grid(&path).unwrap();
        assert_eq!(back.a(), g.a());
        assert_eq!(back.n(), g.n());
        assert_eq!(back.support_radius(), g.support_radius());
        assert_eq!(back.values(), g.values());
    }

    #[test]
    fn grid_header_layout() {
        let g = sample_function(&Descriptor::Zero, 1.0, 8, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.fzg");
        write_grid(&path, &g).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[0..4], b"FZG1");
        assert_eq!(f64::from_le_bytes(bytes[4..12].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(bytes[12..20].try_into().unwrap()), 1.0);
        assert_eq!(u32::from_le_bytes(bytes[20..24].try_into().unwrap()), 8);
        assert_eq!(bytes.len(), 24 + 8 * 8 * 16);
    }

    #[test]
    fn corrupted_grids_are_format_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.fzg");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(read_grid(&path), Err(FzError::Format(_))));
        std::fs::write(&path, b"FZG1\x00\x00").unwrap();
        assert!(matches!(read_grid(&path), Err(FzError::Format(_))));

        // Truncated value section.
        let g = sample_function(&Descriptor::Zero, 1.0, 8, 1.0).unwrap();
        let good = dir.path().join("good.fzg");
        write_grid(&good, &g).unwrap();
        let mut bytes = std::fs::read(&good).unwrap();
        bytes.truncate(bytes.len() - 3);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_grid(&path), Err(FzError::Format(_))));
    }

    #[test]
    fn coeff_json_round_trip_and_order() {
        let d = Descriptor::parse("poly_bump:3,1").unwrap();
        let table = fz_direct(&d, 1.0, 0.5, Truncation::new(5).unwrap(), 48, 64).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        write_coeffs_json(&path, &table).unwrap();
        let back = read_coeffs_json(&path).unwrap();
        assert_eq!(back.a(), table.a());
        assert_eq!(back.coeffs(), table.coeffs());

        // Serialization is deterministic.
        let again = coeffs_to_json(&table);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), again);

        // Shuffled entries are rejected.
        let mut text = std::fs::read_to_string(&path).unwrap();
        text = text.replacen("\"n\": 0, \"m\": 0", "\"n\": 2, \"m\": 0", 1);
        std::fs::write(&path, text).unwrap();
        assert!(matches!(read_coeffs_json(&path), Err(FzError::Format(_))));
    }

    #[test]
    fn pgm_conventions() {
        let dir = tempfile::tempdir().unwrap();

        // Zero grid: constant 128.
        let z = sample_function(&Descriptor::Zero, 1.0, 8, 1.0).unwrap();
        let path = dir.path().join("z.pgm");
        let (lo, hi) = write_pgm(&path, &z).unwrap();
        assert_eq!((lo, hi), (0.0, 0.0));
        let bytes = std::fs::read(&path).unwrap();
        let header_len = b"P5\n8 8\n255\n".len();
        assert!(bytes[header_len..].iter().all(|&b| b == 128));

        // A bump is brightest at the cell nearest its center; the offset
        // keeps the argmax unique.
        let d = Descriptor::parse("gauss_bump:0.2,0.07,0.04").unwrap();
        let g = sample_function(&d, 1.0, 32, 1.0).unwrap();
        let path = dir.path().join("g.pgm");
        let (lo, hi) = write_pgm(&path, &g).unwrap();
        assert!(hi > lo);
        let bytes = std::fs::read(&path).unwrap();
        let header_len = b"P5\n32 32\n255\n".len();
        let pix = &bytes[header_len..];
        let argmax_pix = pix.iter().enumerate().max_by_key(|(_, &b)| b).unwrap().0;
        // Grid argmax, mapped into image coordinates (rows flipped).
        let mut best = (0usize, 0usize, f64::MIN);
        for i2 in 0..32 {
            for i1 in 0..32 {
                let v = g.value(i1, i2).re;
                if v > best.2 {
                    best = (i1, i2, v);
                }
            }
        }
        let expect = (31 - best.1) * 32 + best.0;
        assert_eq!(argmax_pix, expect);

        write_pgm_sidecar(&dir.path().join("g.pgm.txt"), &g, lo, hi).unwrap();
        let sidecar = std::fs::read_to_string(dir.path().join("g.pgm.txt")).unwrap();
        assert!(sidecar.contains("max:"));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = sample_function(&Descriptor::Zero, 1.0, 4, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        write_grid_csv(&path, &g).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x1,x2,re,im");
        assert_eq!(lines.count(), 16);
    }

    proptest! {
        #[test]
        fn f64_formatting_round_trips(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
