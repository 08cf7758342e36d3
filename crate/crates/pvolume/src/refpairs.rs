//! Reference pairs (φ, ψ) for the two-potential decomposition.
//!
//! * `Bc2k`: free waves at energy k², φ = ρ j_ℓ(ρ), ψ = −ρ y_ℓ(ρ), ρ = kx.
//! * `Bc2`: free waves at threshold, φ = x^{ℓ+1}, ψ = x^{−ℓ}.
//! * `Bc23`: threshold solutions of V_f = −c3f/x³, built on J and Y of order 2ℓ+1.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::specfun::{bessel_table, cyl_derivative, sph_derivative, spherical_table};

/// Which reference pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bc {
    Bc2k,
    Bc2,
    Bc23,
}

impl FromStr for Bc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BC2K" => Ok(Bc::Bc2k),
            "BC2" => Ok(Bc::Bc2),
            "BC23" => Ok(Bc::Bc23),
            _ => Err(Error::domain(format!("unknown reference pair '{s}'"))),
        }
    }
}

impl fmt::Display for Bc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bc::Bc2k => "BC2k",
            Bc::Bc2 => "BC2",
            Bc::Bc23 => "BC23",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefPairSpec<T> {
    pub bc: Bc,
    pub l: u32,
    pub k: T,
    pub c3f: T,
}

impl<T: Real> RefPairSpec<T> {
    pub fn bc2(l: u32) -> Self {
        Self { bc: Bc::Bc2, l, k: T::zero(), c3f: T::zero() }
    }

    pub fn bc2k(l: u32, k: T) -> Result<Self> {
        let s = Self { bc: Bc::Bc2k, l, k, c3f: T::zero() };
        s.validate()?;
        Ok(s)
    }

    pub fn bc23(l: u32, c3f: T) -> Result<Self> {
        let s = Self { bc: Bc::Bc23, l, k: T::zero(), c3f };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.bc {
            Bc::Bc2k => self.k > T::zero() && self.k.is_finite() && self.c3f == T::zero(),
            Bc::Bc2 => self.k == T::zero() && self.c3f == T::zero(),
            Bc::Bc23 => self.k == T::zero() && self.c3f > T::zero() && self.c3f.is_finite(),
        };
        if !ok {
            return Err(Error::domain(format!(
                "invalid {} pair: k = {}, c3f = {}",
                self.bc, self.k, self.c3f
            )));
        }
        let lmax = match self.bc {
            Bc::Bc2k => crate::specfun::MAX_SPHERICAL_ORDER as u32,
            Bc::Bc23 => (crate::specfun::MAX_BESSEL_ORDER as u32 - 1) / 2,
            Bc::Bc2 => u32::MAX,
        };
        if self.l > lmax {
            return Err(Error::Unsupported(format!("l = {} beyond {} for {}", self.l, lmax, self.bc)));
        }
        Ok(())
    }

    /// The energy k² at which both functions solve the reference equation.
    pub fn energy(&self) -> T {
        self.k * self.k
    }

    /// The reference potential V_f(x).
    pub fn potential(&self, x: T) -> T {
        match self.bc {
            Bc::Bc23 => -self.c3f / (x * x * x),
            _ => T::zero(),
        }
    }
}

/// Values and first derivatives of a reference pair at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairEval<T> {
    pub phi: T,
    pub psi: T,
    pub dphi: T,
    pub dpsi: T,
}

impl<T: Real> PairEval<T> {
    pub fn wronskian(&self) -> T {
        self.phi * self.dpsi - self.dphi * self.psi
    }
}

/// Second derivatives (φ″, ψ″), obtained from recurrences rather than the ODE.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairCurvature<T> {
    pub d2phi: T,
    pub d2psi: T,
}

/// Constant Wronskian φψ′ − φ′ψ of the pair.
pub fn wronskian<T: Real>(spec: &RefPairSpec<T>) -> Result<T> {
    spec.validate()?;
    Ok(match spec.bc {
        Bc::Bc2k => -spec.k,
        Bc::Bc2 | Bc::Bc23 => -lit::<T>((2 * spec.l + 1) as f64),
    })
}

fn check_x<T: Real>(x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("x must be positive, got {x}")))
    }
}

/// φ, ψ and their first derivatives at x.
pub fn eval_pair<T: Real>(spec: &RefPairSpec<T>, x: T) -> Result<PairEval<T>> {
    Ok(eval_full(spec, x, false)?.0)
}

/// φ, ψ, their first and second derivatives at x.
pub fn eval_pair_curvature<T: Real>(spec: &RefPairSpec<T>, x: T) -> Result<(PairEval<T>, PairCurvature<T>)> {
    let (e, c) = eval_full(spec, x, true)?;
    Ok((e, c.expect("curvature requested")))
}

fn factorial<T: Real>(n: u32) -> T {
    (1..=n).fold(T::one(), |a, i| a * lit(i as f64))
}

fn eval_full<T: Real>(
    spec: &RefPairSpec<T>,
    x: T,
    curvature: bool,
) -> Result<(PairEval<T>, Option<PairCurvature<T>>)> {
    spec.validate()?;
    check_x(x)?;
    let l = spec.l as usize;
    match spec.bc {
        Bc::Bc2 => {
            let lf = lit::<T>(l as f64);
            let phi = x.powi(l as i32 + 1);
            let psi = x.powi(-(l as i32));
            let e = PairEval {
                phi,
                psi,
                dphi: (lf + T::one()) * phi / x,
                dpsi: -lf * psi / x,
            };
            let c = curvature.then(|| PairCurvature {
                d2phi: (lf + T::one()) * lf * phi / (x * x),
                d2psi: lf * (lf + T::one()) * psi / (x * x),
            });
            Ok((e, c))
        }
        Bc::Bc2k => {
            let k = spec.k;
            let rho = k * x;
            let (j, y) = spherical_table(l + 2, rho)?;
            let one = |t: &[T]| -> (T, T, T) {
                let d1 = sph_derivative(t, l, rho);
                let d2 = if l == 0 {
                    -sph_derivative(t, 1, rho)
                } else {
                    let lp1 = lit::<T>((l + 1) as f64);
                    sph_derivative(t, l - 1, rho) + lp1 / (rho * rho) * t[l] - lp1 / rho * d1
                };
                (t[l], d1, d2)
            };
            let (jv, jd, jdd) = one(&j);
            let (yv, yd, ydd) = one(&y);
            let two = lit::<T>(2.0);
            let e = PairEval {
                phi: rho * jv,
                psi: -rho * yv,
                dphi: k * (jv + rho * jd),
                dpsi: -k * (yv + rho * yd),
            };
            let c = curvature.then(|| PairCurvature {
                d2phi: k * k * (two * jd + rho * jdd),
                d2psi: -k * k * (two * yd + rho * ydd),
            });
            Ok((e, c))
        }
        Bc::Bc23 => {
            let n = 2 * l + 1;
            let c3f = spec.c3f;
            let z = lit::<T>(2.0) * (c3f / x).sqrt();
            let (jt, yt) = bessel_table(n + 2, z)?;
            let sx = x.sqrt();
            let half = lit::<T>(0.5);
            let pow = c3f.powf(lit::<T>(l as f64) + half);
            let a_phi = -T::PI() * pow / factorial::<T>(2 * l as u32);
            let a_psi = factorial::<T>(n as u32) / pow;
            // u = √x F(z): u' = (F − zF')/(2√x), u'' = (z²F'' + zF' − F)/(4 x^{3/2})
            let one = |t: &[T]| -> (T, T, T) {
                let f = t[n];
                let fd = cyl_derivative(t, n, z);
                let below = if n >= 2 { t[n - 2] } else { -t[1] };
                let fdd = lit::<T>(0.25) * (below - lit::<T>(2.0) * f + t[n + 2]);
                (f, fd, fdd)
            };
            let (yv, yd, ydd) = one(&yt);
            let (jv, jd, jdd) = one(&jt);
            let d1 = |f: T, fd: T| (f - z * fd) / (lit::<T>(2.0) * sx);
            let d2 = |f: T, fd: T, fdd: T| (z * z * fdd + z * fd - f) / (lit::<T>(4.0) * x * sx);
            let e = PairEval {
                phi: a_phi * sx * yv,
                psi: a_psi * sx * jv,
                dphi: a_phi * d1(yv, yd),
                dpsi: a_psi * d1(jv, jd),
            };
            let c = curvature.then(|| PairCurvature {
                d2phi: a_phi * d2(yv, yd, ydd),
                d2psi: a_psi * d2(jv, jd, jdd),
            });
            Ok((e, c))
        }
    }
}
