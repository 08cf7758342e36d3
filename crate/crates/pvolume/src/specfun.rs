//! Bessel functions of integer order and spherical Bessel functions.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Largest order accepted by [`bessel_integer`].
pub const MAX_BESSEL_ORDER: usize = 15;
/// Largest degree accepted by [`spherical_bessel`].
pub const MAX_SPHERICAL_ORDER: usize = 12;
/// Largest order the table routines will build.
pub const TABLE_LIMIT: usize = 24;

const MAX_ITER: usize = 200_000;

/// A function value together with its derivative with respect to the argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselEval<T> {
    pub value: T,
    pub derivative: T,
}

fn check_arg<T: Real>(z: T, what: &str) -> Result<()> {
    if z > T::zero() && z.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} argument must be positive and finite, got {z}")))
    }
}

/// J_n(z), Y_n(z) and their derivatives.
pub fn bessel_integer<T: Real>(n: usize, z: T) -> Result<(BesselEval<T>, BesselEval<T>)> {
    if n > MAX_BESSEL_ORDER {
        return Err(Error::Unsupported(format!("Bessel order {n} > {MAX_BESSEL_ORDER}")));
    }
    let (j, y) = bessel_table(n.max(1), z)?;
    Ok((
        BesselEval { value: j[n], derivative: cyl_derivative(&j, n, z) },
        BesselEval { value: y[n], derivative: cyl_derivative(&y, n, z) },
    ))
}

/// Derivative of a cylinder function from a table of consecutive orders.
pub fn cyl_derivative<T: Real>(t: &[T], n: usize, z: T) -> T {
    if n == 0 {
        -t[1]
    } else {
        t[n - 1] - lit::<T>(n as f64) / z * t[n]
    }
}

/// Tables J_0..=J_nmax and Y_0..=Y_nmax at `z`.
pub fn bessel_table<T: Real>(nmax: usize, z: T) -> Result<(Vec<T>, Vec<T>)> {
    check_arg(z, "Bessel")?;
    if nmax > TABLE_LIMIT {
        return Err(Error::Unsupported(format!("Bessel table order {nmax} > {TABLE_LIMIT}")));
    }
    let nmax = nmax.max(1);
    if z < lit(2.0) {
        Ok(small_argument(nmax, z))
    } else {
        steed(nmax, z)
    }
}

fn small_argument<T: Real>(nmax: usize, z: T) -> (Vec<T>, Vec<T>) {
    let eps = T::epsilon();
    let half = z / lit(2.0);
    let q = -half * half;
    let mut j = vec![T::zero(); nmax + 1];
    let mut lead = T::one();
    for (n, slot) in j.iter_mut().enumerate() {
        if n > 0 {
            lead = lead * half / lit(n as f64);
        }
        let mut term = lead;
        let mut sum = term;
        for k in 1..200 {
            term = term * q / lit((k * (n + k)) as f64);
            sum = sum + term;
            if term.abs() <= eps * sum.abs() {
                break;
            }
        }
        *slot = sum;
    }
    let gamma = lit::<T>(EULER_GAMMA);
    let pi = T::PI();
    let log_half = half.ln();
    // psi(k+1) + psi(n+k+1) accumulated through harmonic numbers
    let log_sum = |n: usize| -> T {
        let mut hk = T::zero();
        let mut hnk = (1..=n).fold(T::zero(), |a, i| a + T::one() / lit(i as f64));
        let fact = (1..=n).fold(T::one(), |a, i| a * lit(i as f64));
        let mut term = half.powi(n as i32) / fact;
        let mut sum = term * (hk + hnk - gamma - gamma);
        for k in 1..200 {
            hk = hk + T::one() / lit(k as f64);
            hnk = hnk + T::one() / lit((n + k) as f64);
            term = term * q / lit((k * (n + k)) as f64);
            let add = term * (hk + hnk - gamma - gamma);
            sum = sum + add;
            if add.abs() <= eps * sum.abs() {
                break;
            }
        }
        sum
    };
    let mut y = vec![T::zero(); nmax + 1];
    y[0] = lit::<T>(2.0) / pi * log_half * j[0] - log_sum(0) / pi;
    y[1] = -T::one() / (pi * half) + lit::<T>(2.0) / pi * log_half * j[1] - log_sum(1) / pi;
    upward(&mut y, z);
    (j, y)
}

fn upward<T: Real>(y: &mut [T], z: T) {
    for k in 1..y.len() - 1 {
        y[k + 1] = lit::<T>(2.0 * k as f64) / z * y[k] - y[k - 1];
    }
}

/// Steed's method: CF1 for J'_n/J_n, downward recurrence, CF2 at order zero.
fn steed<T: Real>(nmax: usize, x: T) -> Result<(Vec<T>, Vec<T>)> {
    let eps = T::epsilon();
    let fpmin = T::min_positive_value() / eps;
    let big = T::max_value().sqrt();
    let xi = T::one() / x;
    let xi2 = xi + xi;
    let w = xi2 / T::PI();
    let nu = lit::<T>(nmax as f64);

    let mut isign = T::one();
    let mut h = (nu * xi).max(fpmin);
    let mut b = xi2 * nu;
    let mut d = T::zero();
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAX_ITER {
        b = b + xi2;
        d = b - d;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = b - T::one() / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = T::one() / d;
        let del = c * d;
        h = del * h;
        if d < T::zero() {
            isign = -isign;
        }
        if (del - T::one()).abs() < eps {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Diagnostics(format!("Bessel CF1 did not converge at z = {x}")));
    }

    let mut j = vec![T::zero(); nmax + 1];
    let mut rjl = isign * fpmin;
    let mut rjpl = h * rjl;
    j[nmax] = rjl;
    let mut fact = nu * xi;
    for l in (1..=nmax).rev() {
        let rjtemp = fact * rjl + rjpl;
        fact = fact - xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        j[l - 1] = rjl;
        if rjl.abs() > big {
            let s = T::one() / big;
            rjl = rjl * s;
            rjpl = rjpl * s;
            for v in j[l - 1..].iter_mut() {
                *v = *v * s;
            }
        }
    }
    if rjl == T::zero() {
        rjl = eps;
    }
    let f = rjpl / rjl;

    let mut a = lit::<T>(0.25);
    let mut p = lit::<T>(-0.5) * xi;
    let mut q = T::one();
    let br = x + x;
    let mut bi = lit::<T>(2.0);
    let fct = a * xi / (p * p + q * q);
    let mut cr = br + q * fct;
    let mut ci = bi + p * fct;
    let den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    converged = false;
    for i in 2..MAX_ITER {
        a = a + lit((2 * (i - 1)) as f64);
        bi = bi + lit(2.0);
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < fpmin {
            dr = fpmin;
        }
        let fct = a / (cr * cr + ci * ci);
        cr = br + cr * fct;
        ci = bi - ci * fct;
        if cr.abs() + ci.abs() < fpmin {
            cr = fpmin;
        }
        let den = dr * dr + di * di;
        dr = dr / den;
        di = -di / den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        let temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - T::one()).abs() + dli.abs() < eps {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Diagnostics(format!("Bessel CF2 did not converge at z = {x}")));
    }
    let gam = (p - f) / q;
    let mut rjmu = (w / ((p - f) * gam + q)).sqrt();
    if rjl < T::zero() {
        rjmu = -rjmu;
    }
    let rymu = rjmu * gam;
    let rymup = rymu * (p + q / gam);
    let scale = rjmu / rjl;
    for v in j.iter_mut() {
        *v = *v * scale;
    }
    let mut y = vec![T::zero(); nmax + 1];
    y[0] = rymu;
    y[1] = -rymup;
    upward(&mut y, x);
    Ok((j, y))
}

/// j_ℓ(ρ), y_ℓ(ρ) and their derivatives.
pub fn spherical_bessel<T: Real>(l: usize, rho: T) -> Result<(BesselEval<T>, BesselEval<T>)> {
    if l > MAX_SPHERICAL_ORDER {
        return Err(Error::Unsupported(format!("spherical Bessel degree {l} > {MAX_SPHERICAL_ORDER}")));
    }
    let (j, y) = spherical_table(l + 1, rho)?;
    Ok((
        BesselEval { value: j[l], derivative: sph_derivative(&j, l, rho) },
        BesselEval { value: y[l], derivative: sph_derivative(&y, l, rho) },
    ))
}

/// Derivative of a spherical cylinder function from a table of consecutive degrees.
pub fn sph_derivative<T: Real>(t: &[T], l: usize, rho: T) -> T {
    if l == 0 {
        -t[1]
    } else {
        t[l - 1] - lit::<T>((l + 1) as f64) / rho * t[l]
    }
}

/// Tables j_0..=j_lmax and y_0..=y_lmax at ρ.
pub fn spherical_table<T: Real>(lmax: usize, rho: T) -> Result<(Vec<T>, Vec<T>)> {
    check_arg(rho, "spherical Bessel")?;
    if lmax > TABLE_LIMIT {
        return Err(Error::Unsupported(format!("spherical table degree {lmax} > {TABLE_LIMIT}")));
    }
    let lmax = lmax.max(1);
    let (s, c) = (rho.sin(), rho.cos());
    let mut y = vec![T::zero(); lmax + 1];
    y[0] = -c / rho;
    y[1] = -c / (rho * rho) - s / rho;
    for l in 1..lmax {
        y[l + 1] = lit::<T>((2 * l + 1) as f64) / rho * y[l] - y[l - 1];
    }
    let mut j = vec![T::zero(); lmax + 1];
    let j0 = s / rho;
    let j1 = s / (rho * rho) - c / rho;
    if rho < T::one() {
        let q = -rho * rho / lit(2.0);
        let mut lead = T::one();
        for (l, slot) in j.iter_mut().enumerate() {
            if l > 0 {
                lead = lead * rho / lit((2 * l + 1) as f64);
            }
            let mut term = lead;
            let mut sum = term;
            for k in 1..100 {
                term = term * q / lit((k * (2 * l + 2 * k + 1)) as f64);
                sum = sum + term;
                if term.abs() <= T::epsilon() * sum.abs() {
                    break;
                }
            }
            *slot = sum;
        }
    } else if rho > lit(lmax as f64) {
        j[0] = j0;
        j[1] = j1;
        for l in 1..lmax {
            j[l + 1] = lit::<T>((2 * l + 1) as f64) / rho * j[l] - j[l - 1];
        }
    } else {
        let start = 2 * lmax.max(rho.to_usize().unwrap_or(0)) + 30;
        let big = T::max_value().sqrt();
        let (mut fp1, mut f) = (T::zero(), T::min_positive_value().sqrt());
        for l in (1..=start).rev() {
            let fm1 = lit::<T>((2 * l + 1) as f64) / rho * f - fp1;
            fp1 = f;
            f = fm1;
            if l - 1 <= lmax {
                j[l - 1] = f;
            }
            if f.abs() > big {
                let sc = T::one() / big;
                f = f * sc;
                fp1 = fp1 * sc;
                for v in j.iter_mut() {
                    *v = *v * sc;
                }
            }
        }
        let scale = if s.abs() >= lit(0.5) { j0 / j[0] } else { j1 / j[1] };
        for v in j.iter_mut() {
            *v = *v * scale;
        }
    }
    Ok((j, y))
}
