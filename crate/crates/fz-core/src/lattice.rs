//! Polar bookkeeping of the integer lattice.
//!
//! Every lattice point (k1, k2) has an exact squared radius k1^2 + k2^2 and
//! an angle in [0, 2pi). Grouping the points of a box by squared radius
//! yields the shell decomposition used by the shell-ordered coefficient
//! sums. Shells are keyed by the integer squared radius, never by the
//! floating radius, so grouping is exact.

use crate::error::{FzError, Result};

/// A point of the integer lattice Z^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub k1: i32,
    pub k2: i32,
}

impl LatticePoint {
    pub fn new(k1: i32, k2: i32) -> Self {
        Self { k1, k2 }
    }

    /// Exact squared radius.
    pub fn r2(&self) -> u64 {
        let (a, b) = (self.k1 as i64, self.k2 as i64);
        (a * a + b * b) as u64
    }

    pub fn is_origin(&self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }
}

/// Radius and angle of a lattice point; the angle lies in [0, 2pi) and is 0
/// for the origin by convention.
pub fn polar_of(k: LatticePoint) -> (f64, f64) {
    if k.is_origin() {
        return (0.0, 0.0);
    }
    let rho = (k.r2() as f64).sqrt();
    let mut phi = (k.k2 as f64).atan2(k.k1 as f64);
    if phi < 0.0 {
        phi += std::f64::consts::TAU;
    }
    (rho, phi)
}

/// One radius class of the lattice: its exact squared radius, the real
/// radius, and the finite angle set, in ascending angle order.
#[derive(Debug, Clone)]
pub struct PolarShell {
    r2: u64,
    rho: f64,
    angles: Vec<f64>,
    points: Vec<LatticePoint>,
}

impl PolarShell {
    pub fn r2(&self) -> u64 {
        self.r2
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Lattice points of the shell, aligned with [`angles`](Self::angles).
    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Shell decomposition of the box {|k1|, |k2| <= kmax}, ascending in the
/// exact squared radius.
pub fn shells_up_to(kmax: u32) -> Result<Vec<PolarShell>> {
    if kmax == 0 {
        return Err(FzError::Domain("kmax must be at least 1".into()));
    }
    let k = kmax as i32;
    let mut by_r2: std::collections::BTreeMap<u64, Vec<(f64, LatticePoint)>> =
        std::collections::BTreeMap::new();
    for k1 in -k..=k {
        for k2 in -k..=k {
            let p = LatticePoint::new(k1, k2);
            let (_, phi) = polar_of(p);
            by_r2.entry(p.r2()).or_default().push((phi, p));
        }
    }
    Ok(by_r2
        .into_iter()
        .map(|(r2, mut entries)| {
            entries.sort_by(|a, b| a.0.total_cmp(&b.0));
            PolarShell {
                r2,
                rho: (r2 as f64).sqrt(),
                angles: entries.iter().map(|e| e.0).collect(),
                points: entries.iter().map(|e| e.1).collect(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;
    use std::f64::consts::PI;

    #[test]
    fn polar_of_axis_and_quadrant_points() {
        assert_eq!(polar_of(LatticePoint::new(1, 0)), (1.0, 0.0));
        let (rho, phi) = polar_of(LatticePoint::new(0, -1));
        assert_eq!(rho, 1.0);
        assert!((phi - 1.5 * PI).abs() < 1e-15);
        let (rho, phi) = polar_of(LatticePoint::new(3, 4));
        assert_eq!(rho, 5.0);
        assert!((phi - 0.9272952180016122).abs() < 1e-12);
        assert_eq!(polar_of(LatticePoint::new(0, 0)), (0.0, 0.0));
    }

    #[test]
    fn shells_kmax_1() {
        let shells = shells_up_to(1).unwrap();
        let sizes: Vec<(u64, usize)> = shells.iter().map(|s| (s.r2(), s.len())).collect();
        assert_eq!(sizes, vec![(0, 1), (1, 4), (2, 4)]);
        assert_eq!(shells[0].angles(), &[0.0]);
        assert!(shells_up_to(0).is_err());
    }

    #[test]
    fn shells_cover_the_box_exactly() {
        let kmax = 8u32;
        let shells = shells_up_to(kmax).unwrap();
        let total: usize = shells.iter().map(|s| s.len()).sum();
        assert_eq!(total, 17 * 17);

        // Reconstruct every point from (rho, angle) and compare against the
        // box lattice: no duplicates, no misses.
        let mut seen = HashSet::new();
        for shell in &shells {
            for (&phi, &p) in shell.angles().iter().zip(shell.points()) {
                let k1 = (shell.rho() * phi.cos()).round() as i32;
                let k2 = (shell.rho() * phi.sin()).round() as i32;
                assert_eq!((k1, k2), (p.k1, p.k2));
                assert!(seen.insert((k1, k2)), "duplicate point ({k1}, {k2})");
            }
        }
        let k = kmax as i32;
        for k1 in -k..=k {
            for k2 in -k..=k {
                assert!(seen.contains(&(k1, k2)), "missing point ({k1}, {k2})");
            }
        }
    }

    #[test]
    fn integer_radii_all_present() {
        let kmax = 12u32;
        let shells = shells_up_to(kmax).unwrap();
        let radii: HashSet<u64> = shells.iter().map(|s| s.r2()).collect();
        for t in 0..=kmax as u64 {
            assert!(
                radii.contains(&(t * t)),
                "no shell with squared radius {}",
                t * t
            );
        }
    }

    #[test]
    fn shell_angles_strictly_increasing() {
        for shell in shells_up_to(6).unwrap() {
            for w in shell.angles().windows(2) {
                assert!(w[0] < w[1]);
            }
            for &phi in shell.angles() {
                assert!((0.0..std::f64::consts::TAU).contains(&phi));
            }
        }
    }

    proptest! {
        #[test]
        fn polar_round_trip(k1 in -512i32..=512, k2 in -512i32..=512) {
            let p = LatticePoint::new(k1, k2);
            let (rho, phi) = polar_of(p);
            prop_assert_eq!((rho * phi.cos()).round() as i32, k1);
            prop_assert_eq!((rho * phi.sin()).round() as i32, k2);
        }
    }
}
