#![allow(dead_code)]

use pvolume::levy_keller::{ricatti_integrate, AsymptoticExpansion, Basis};
use pvolume::potentials::Multipole;
use pvolume::refpairs::RefPairSpec;
use pvolume::volfit::{fit_with_basis, MTrace};

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Integrates the Riccati equation from a far anchor set by `e` and refits the
/// trace on [lo, hi] with `basis`.
pub fn riccati_refit(
    v: &Multipole<f64>,
    spec: &RefPairSpec<f64>,
    e: &AsymptoticExpansion<f64>,
    lo: f64,
    hi: f64,
    basis: &[Basis],
) -> Vec<(Basis, f64)> {
    let anchor = 20.0 * hi;
    let mut grid = log_grid(lo, hi, 60);
    grid.push(anchor);
    let tr = ricatti_integrate(v, spec, anchor, e.eval(anchor), &grid).unwrap();
    assert!(tr.poles.is_empty());
    let trace = MTrace {
        samples: tr.points[..60].to_vec(),
        m: 0,
        intensity: 1.0,
        x00: 0.0,
        n: 1,
        bc: spec.bc,
        resonant: false,
        amplitude_sign: 1,
    };
    fit_with_basis(&trace, basis, 1e-6, 1e14).unwrap().coefficients
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
