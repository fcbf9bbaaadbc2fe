//! Built-in analytic test functions.
//!
//! Descriptors are evaluated in Cartesian coordinates together with a support
//! radius: samplers hard-mask outside it, quadratures integrate up to it.
//! The scale-dependent families (`poly_bump`, `cosine_hat`, `basis_element`)
//! use the support radius as their natural length scale.

use num_complex::Complex64;

use crate::basis::FZIndex;
use crate::error::{FzError, Result};
use crate::special;

#[derive(Debug, Clone, PartialEq)]
pub enum Descriptor {
    /// Identically zero.
    Zero,
    /// Indicator of the disk of the given radius.
    DiskIndicator { radius: f64 },
    /// exp(-((x-cx)^2 + (y-cy)^2) / (2 sigma^2)).
    GaussBump { sigma: f64, cx: f64, cy: f64 },
    /// Radial Zernike polynomial times circular harmonic times a smooth
    /// cutoff vanishing at the support radius.
    PolyBump { n: u32, m: i32 },
    /// Radial cosine cap cos(freq*pi*r/R) cos^2(pi*r/(2R)); rotation
    /// invariant and continuously vanishing at the support edge.
    CosineHat { freq: f64 },
    /// Exact basis element V_nm scaled to the support radius; no cutoff.
    /// Not exposed on the CLI; used as an expansion oracle.
    BasisElement { n: u32, m: i32 },
}

impl Descriptor {
    /// Parses the CLI syntax `name` or `name:arg1,arg2,...`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, args) = match text.split_once(':') {
            Some((n, a)) => (n, a),
            None => (text, ""),
        };
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| {
                        FzError::Descriptor(format!("bad numeric argument {s:?} in {text:?}"))
                    })
                })
                .collect::<Result<_>>()?
        };
        let want = |k: usize| -> Result<()> {
            if nums.len() == k {
                Ok(())
            } else {
                Err(FzError::Descriptor(format!(
                    "{name} expects {k} argument(s), got {}",
                    nums.len()
                )))
            }
        };
        match name {
            "zero" => {
                want(0)?;
                Ok(Self::Zero)
            }
            "disk_indicator" => {
                want(1)?;
                if nums[0] <= 0.0 {
                    return Err(FzError::Descriptor(
                        "disk_indicator radius must be positive".into(),
                    ));
                }
                Ok(Self::DiskIndicator { radius: nums[0] })
            }
            "gauss_bump" => {
                want(3)?;
                if nums[0] <= 0.0 {
                    return Err(FzError::Descriptor(
                        "gauss_bump sigma must be positive".into(),
                    ));
                }
                Ok(Self::GaussBump {
                    sigma: nums[0],
                    cx: nums[1],
                    cy: nums[2],
                })
            }
            "poly_bump" => {
                want(2)?;
                let (n, m) = (nums[0], nums[1]);
                if n.fract() != 0.0 || m.fract() != 0.0 || n < 0.0 {
                    return Err(FzError::Descriptor(
                        "poly_bump indices must be integers".into(),
                    ));
                }
                let (n, m) = (n as u32, m as i32);
                FZIndex::new(n, m)?;
                Ok(Self::PolyBump { n, m })
            }
            "cosine_hat" => {
                want(1)?;
                Ok(Self::CosineHat { freq: nums[0] })
            }
            other => Err(FzError::Descriptor(format!("unknown descriptor {other:?}"))),
        }
    }

    /// Value at Cartesian (x, y). `support` is the declared support radius;
    /// the value is zero beyond the descriptor's own natural support but the
    /// caller still applies the hard mask at `support`.
    pub fn eval(&self, x: f64, y: f64, support: f64) -> Complex64 {
        let r = x.hypot(y);
        match *self {
            Descriptor::Zero => Complex64::new(0.0, 0.0),
            Descriptor::DiskIndicator { radius } => {
                if r <= radius {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Descriptor::GaussBump { sigma, cx, cy } => {
                let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                Complex64::new((-d2 / (2.0 * sigma * sigma)).exp(), 0.0)
            }
            Descriptor::PolyBump { n, m } => {
                let t = r / support;
                if t >= 1.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let cutoff = (1.0 - 1.0 / (1.0 - t * t)).exp();
                let z = special::zernike_radial(n, m, t).expect("validated index");
                let theta = y.atan2(x);
                z * cutoff * Complex64::from_polar(1.0, m as f64 * theta)
            }
            Descriptor::CosineHat { freq } => {
                if r > support {
                    return Complex64::new(0.0, 0.0);
                }
                let t = r / support;
                let cap = (std::f64::consts::FRAC_PI_2 * t).cos().powi(2);
                Complex64::new((freq * std::f64::consts::PI * t).cos() * cap, 0.0)
            }
            Descriptor::BasisElement { n, m } => {
                if r > support {
                    return Complex64::new(0.0, 0.0);
                }
                let z = special::zernike_radial(n, m, r / support).expect("validated index");
                let norm = ((n as f64 + 1.0) / std::f64::consts::PI).sqrt() / support;
                let theta = y.atan2(x);
                norm * z * Complex64::from_polar(1.0, m as f64 * theta)
            }
        }
    }

    /// True when the function is real-valued.
    pub fn is_real(&self) -> bool {
        match self {
            Descriptor::PolyBump { m, .. } | Descriptor::BasisElement { m, .. } => *m == 0,
            _ => true,
        }
    }
}

impl std::fmt::Display for Descriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Descriptor::Zero => write!(f, "zero"),
            Descriptor::DiskIndicator { radius } => write!(f, "disk_indicator:{radius}"),
            Descriptor::GaussBump { sigma, cx, cy } => write!(f, "gauss_bump:{sigma},{cx},{cy}"),
            Descriptor::PolyBump { n, m } => write!(f, "poly_bump:{n},{m}"),
            Descriptor::CosineHat { freq } => write!(f, "cosine_hat:{freq}"),
            Descriptor::BasisElement { n, m } => write!(f, "basis_element:{n},{m}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for text in [
            "zero",
            "disk_indicator:0.5",
            "gauss_bump:0.15,0,0",
            "poly_bump:3,1",
            "cosine_hat:2",
        ] {
            let d = Descriptor::parse(text).unwrap();
            let again = Descriptor::parse(&d.to_string()).unwrap();
            assert_eq!(d, again);
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Descriptor::parse("gauss").is_err());
        assert!(Descriptor::parse("gauss_bump:1").is_err());
        assert!(Descriptor::parse("gauss_bump:a,b,c").is_err());
        assert!(Descriptor::parse("disk_indicator:-1").is_err());
        assert!(Descriptor::parse("poly_bump:2,1").is_err());
        assert!(Descriptor::parse("zero:1").is_err());
    }

    #[test]
    fn values_behave() {
        let d = Descriptor::parse("disk_indicator:0.5").unwrap();
        assert_eq!(d.eval(0.3, 0.0, 1.0).re, 1.0);
        assert_eq!(d.eval(0.4, 0.4, 1.0).re, 0.0);

        let g = Descriptor::parse("gauss_bump:0.5,0.1,0").unwrap();
        assert!((g.eval(0.1, 0.0, 1.0).re - 1.0).abs() < 1e-15);

        let p = Descriptor::parse("poly_bump:2,2").unwrap();
        assert_eq!(p.eval(0.5, 0.0, 0.5).norm(), 0.0); // vanishes at the edge
        assert!(p.eval(0.2, 0.1, 0.5).norm() > 0.0);
        assert!(!p.is_real());

        let c = Descriptor::parse("cosine_hat:1").unwrap();
        assert!((c.eval(0.0, 0.0, 0.5).re - 1.0).abs() < 1e-15);
        assert!(c.eval(0.0, 0.5, 0.5).norm() < 1e-15);
    }
}
