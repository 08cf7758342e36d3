//! Regeneration of the fit table and the field-free and field-dressed figures.

use pvolume::levy_keller::{alpha_beta, delta_m0, m_expansion, Basis};
use pvolume::potentials::{multipole_model, Model};
use pvolume::refpairs::Bc;
use pvolume::scan::{field_free_params, label_resonances, uniform_grid, LabeledScan, ScanOptions};
use pvolume::volfit::{extract_volume, linear_relation, VolumeConfig, VolumeEstimate};
use pvolume::Result;
use rayon::prelude::*;

/// Largest |v| kept as off-resonance; the ln x/x coefficient carries a bias growing like v².
pub const OFF_RESONANCE: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Table3Row {
    pub quantity: &'static str,
    pub fitted: Option<f64>,
    /// Sample standard deviation of a fitted mean; 1 − R² for α and β.
    pub spread: Option<f64>,
    pub analytic: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table3Block {
    pub intensity: f64,
    pub m: i32,
    pub bc: Bc,
    pub samples: usize,
    pub rows: Vec<Table3Row>,
}

impl Table3Block {
    pub fn row(&self, quantity: &str) -> Option<&Table3Row> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

const TERMS: [(Basis, &str); 4] =
    [(Basis::X2, "x^2"), (Basis::X, "x"), (Basis::LnX, "ln x"), (Basis::LnXOverX, "ln x/x")];

fn block(
    base: &VolumeConfig<f64>,
    bc: Bc,
    kept: &[(VolumeEstimate<f64>, VolumeEstimate<f64>)],
    pick: impl Fn(&(VolumeEstimate<f64>, VolumeEstimate<f64>)) -> &VolumeEstimate<f64>,
) -> Result<Table3Block> {
    let v = multipole_model::<f64>(Model::Adiabatic, base.m, base.intensity)?;
    let c3f = v.c3.abs();
    let f = if bc == Bc::Bc2 { 0.0 } else { c3f };
    let analytic = m_expansion(&v, bc, f, 0.0)?;
    let fits: Vec<_> = kept.iter().map(|p| pick(p).fit.as_ref().expect("kept estimates carry fits")).collect();
    let mut rows = Vec::new();
    for (b, name) in TERMS {
        let vals: Vec<f64> = fits.iter().filter_map(|f| f.coefficient(b)).collect();
        let (fitted, spread) = if vals.len() == fits.len() && !vals.is_empty() {
            let (m, s) = mean_std(&vals);
            (Some(m), Some(s))
        } else {
            (None, None)
        };
        rows.push(Table3Row { quantity: name, fitted, spread, analytic: Some(analytic.coefficient(b).unwrap_or(0.0)) });
    }
    let (a, bt) = alpha_beta(&v, bc, f)?;
    let vs: Vec<f64> = fits.iter().map(|f| f.volume).collect();
    let etas: Vec<f64> = fits.iter().map(|f| f.eta).collect();
    let rel = linear_relation(&vs, &etas).ok();
    rows.push(Table3Row { quantity: "alpha", fitted: rel.map(|r| r.alpha), spread: rel.map(|r| 1.0 - r.r_squared), analytic: Some(a) });
    rows.push(Table3Row { quantity: "beta", fitted: rel.map(|r| r.beta), spread: rel.map(|r| 1.0 - r.r_squared), analytic: Some(bt) });
    if bc == Bc::Bc23 {
        let d: Vec<f64> = kept.iter().map(|(b2, b23)| b23.volume - b2.volume).collect();
        let (m, s) = mean_std(&d);
        rows.push(Table3Row { quantity: "delta_m0", fitted: Some(m), spread: Some(s), analytic: Some(delta_m0(v.c3, v.c4, c3f)?) });
    }
    Ok(Table3Block { intensity: base.intensity, m: base.m, bc, samples: kept.len(), rows })
}

/// The four (m, BC) blocks of the fit table at one intensity.
///
/// Each candidate x00 is fitted with both reference pairs; candidates where
/// either fit fails or |v_BC2| exceeds [`OFF_RESONANCE`] are dropped.
pub fn table3(base: &VolumeConfig<f64>, candidates: &[f64]) -> Result<Vec<Table3Block>> {
    let mut blocks = Vec::new();
    for m in [0, 1] {
        let c2 = VolumeConfig { m, bc: Bc::Bc2, ..base.clone() };
        let c23 = VolumeConfig { m, bc: Bc::Bc23, ..base.clone() };
        let kept: Vec<(VolumeEstimate<f64>, VolumeEstimate<f64>)> = candidates
            .par_iter()
            .map(|x| (extract_volume(&c2, *x), extract_volume(&c23, *x)))
            .collect::<Vec<_>>()
            .into_iter()
            .filter_map(|(a, b)| match (a, b) {
                (Ok(a), Ok(b)) if !a.is_pole() && !b.is_pole() && a.volume.abs() <= OFF_RESONANCE => Some((a, b)),
                _ => None,
            })
            .collect();
        log::info!("table3 m={m}: {} of {} candidate x00 off resonance", kept.len(), candidates.len());
        blocks.push(block(&c2, Bc::Bc2, &kept, |p| &p.0)?);
        blocks.push(block(&c23, Bc::Bc23, &kept, |p| &p.1)?);
    }
    Ok(blocks)
}

/// Interior candidates: `points` nodes strictly inside [lo, hi].
pub fn candidates(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let g = uniform_grid(lo, hi, points + 2);
    g[1..g.len() - 1].to_vec()
}

/// Field-free parameters of ℓ = 0, 1, 3 along the x00 grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Fig1Point {
    pub x00: f64,
    pub a: Option<f64>,
    pub volume_p: Option<f64>,
    pub length_p: Option<f64>,
    pub value_f: Option<f64>,
    pub length_f: Option<f64>,
}

pub fn fig1(grid: &[f64]) -> Vec<Fig1Point> {
    grid.par_iter()
        .map(|x| {
            let s = field_free_params(0, *x).ok();
            let p = field_free_params(1, *x).ok();
            let f = field_free_params(3, *x).ok();
            Fig1Point {
                x00: *x,
                a: s.map(|s| s.value),
                volume_p: p.and_then(|p| p.volume),
                length_p: p.map(|p| p.length),
                value_f: f.map(|f| f.value),
                length_f: f.map(|f| f.length),
            }
        })
        .collect()
}

pub fn fig2(base: &VolumeConfig<f64>, grid: &[f64], n_max: usize, opts: &ScanOptions<f64>) -> Result<LabeledScan<f64>> {
    label_resonances(base, grid, n_max, opts)
}
