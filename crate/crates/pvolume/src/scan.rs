//! Scans of the volume over x00 or intensity, resonance location and labeling,
//! and the field-free scattering parameters.

use rayon::prelude::*;

use crate::ccsolve::{field_free_regular, threshold_sweep, GridControl};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::volfit::{extract_volume, VolumeConfig, VolumeEstimate};

/// Field-free threshold parameter of partial wave ℓ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringParams<T> {
    pub l: u32,
    /// a_ℓ^{2ℓ+1}/((2ℓ+1)!!(2ℓ−1)!!), the −B/A of u → A x^{ℓ+1} + B x^{−ℓ}.
    pub value: T,
    /// a_ℓ itself (signed).
    pub length: T,
    /// 𝓥 = a₁³/3, for ℓ = 1.
    pub volume: Option<T>,
}

const MATCH_RADIUS: f64 = 1.0;

fn double_factorial(n: i64) -> f64 {
    (1..=n).rev().step_by(2).map(|k| k as f64).product()
}

/// x^{p}·Σ_k (−w)^k/(k!(1+s)_k) with w = 1/(16x⁴), and its derivative.
///
/// With s = ∓ν, ν = (2ℓ+1)/4, these are √x J_{±ν}(1/(2x²)) normalized to
/// x^{ℓ+1} and x^{−ℓ}: exact zero-energy solutions of the −1/x⁶ potential.
fn vdw_threshold<T: Real>(p: T, s: T, x: T) -> (T, T) {
    let w = T::one() / (lit::<T>(16.0) * x.powi(4));
    let (mut term, mut sum, mut dsum) = (T::one(), T::one(), T::zero());
    for k in 1..200 {
        let kf = lit::<T>(k as f64);
        term = -term * w / (kf * (kf + s));
        sum = sum + term;
        // d/dx of w^k is −4k w^k / x
        dsum = dsum - lit::<T>(4.0) * kf * term / x;
        if term.abs() < T::epsilon() * sum.abs() * lit(1e-3) {
            break;
        }
    }
    let xp = x.powf(p);
    (xp * sum, xp * (p / x * sum + dsum))
}

/// Field-free threshold parameter for a node at x00.
pub fn field_free_params<T: Real>(l: u32, x00: T) -> Result<ScatteringParams<T>> {
    field_free_params_with(l, x00, &GridControl { rtol: lit(1e-13), atol: lit(1e-300), ..GridControl::default() })
}

pub fn field_free_params_with<T: Real>(l: u32, x00: T, control: &GridControl<T>) -> Result<ScatteringParams<T>> {
    if l != 0 && l % 2 == 0 {
        return Err(Error::domain(format!("l = {l}: only l = 0 and odd l are supported")));
    }
    if l > 11 {
        return Err(Error::Unsupported(format!("l = {l} above 11")));
    }
    if !(x00 > lit(0.1) && x00 < lit(0.2)) {
        return Err(Error::domain(format!("x00 = {x00} outside (0.1, 0.2)")));
    }
    let xm = lit::<T>(MATCH_RADIUS);
    let (u, du) = field_free_regular(l, x00, xm, control)?;
    let lf = lit::<T>(l as f64);
    let nu = (lit::<T>(2.0) * lf + T::one()) / lit(4.0);
    let (fp, dfp) = vdw_threshold(lf + T::one(), -nu, xm);
    let (fm, dfm) = vdw_threshold(-lf, nu, xm);
    let w = fp * dfm - dfp * fm;
    let a = (u * dfm - du * fm) / w;
    let b = (fp * du - dfp * u) / w;
    let value = if a == T::zero() { T::infinity() } else { -b / a };
    let norm = lit::<T>(double_factorial(2 * l as i64 + 1) * double_factorial(2 * l as i64 - 1));
    let scaled = value * norm;
    let root = scaled.abs().powf(T::one() / lit::<T>((2 * l + 1) as f64));
    let length = if scaled < T::zero() { -root } else { root };
    Ok(ScatteringParams { l, value, length, volume: (l == 1).then_some(value) })
}

/// What the scan axis varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanAxis {
    X00,
    Intensity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanPoint<T> {
    pub axis: T,
    /// M₀, or ±∞ when the trace itself straddles a pole.
    pub m0: T,
    pub pole: bool,
    pub amplitude_sign: i8,
    pub bc2_equivalent: Option<T>,
    pub eta: Option<T>,
    /// Why this point has no value, when it failed.
    pub diagnostic: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanCurve<T> {
    pub axis_kind: ScanAxis,
    pub points: Vec<ScanPoint<T>>,
    pub m: i32,
    pub n: usize,
    /// The fixed coordinate: intensity for x00 scans, x00 for intensity scans.
    pub fixed: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Resonance<T> {
    pub position: T,
    pub bracket: (T, T),
    /// ℓ̃ = 2·n_appear − 1.
    pub label: u32,
    pub n_appear: usize,
    /// Sign of M₀ just below and just above the pole.
    pub sides: (i8, i8),
    /// Refined neighbors (x − h, M₀) and (x + h, M₀): the closest points
    /// outside the pole whose traces are themselves pole-free.
    pub neighbors: Option<((T, T), (T, T))>,
    /// Interval where |M₀| exceeds ten times the scan median, from a local 1/(x − x_p) model.
    pub width: Option<T>,
    /// Another pole was within tracking tolerance during labeling.
    pub ambiguous: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions<T> {
    /// Bisection stops below this bracket width.
    pub refine_tol: T,
    /// Nearest-position tolerance when matching poles across n.
    pub tracking_tol: T,
    /// Refinement continues until both neighbors of a pole exceed this |M₀|
    /// with opposite signs.
    pub pole_magnitude: T,
}

impl<T: Real> Default for ScanOptions<T> {
    fn default() -> Self {
        Self { refine_tol: lit(1e-7), tracking_tol: lit(1e-3), pole_magnitude: lit(1e3) }
    }
}

/// The default x00 grid: 150 points across one s-wave quasi-period.
pub fn default_x00_grid<T: Real>() -> Vec<T> {
    uniform_grid(lit(0.142152), lit(0.152135), 150)
}

pub fn uniform_grid<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    if points < 2 {
        return vec![lo];
    }
    (0..points)
        .map(|i| if i + 1 == points { hi } else { lo + (hi - lo) * lit::<T>(i as f64) / lit::<T>((points - 1) as f64) })
        .collect()
}

fn at_axis<T: Real>(cfg: &VolumeConfig<T>, kind: ScanAxis, fixed: T, a: T) -> (VolumeConfig<T>, T) {
    match kind {
        ScanAxis::X00 => (cfg.clone(), a),
        ScanAxis::Intensity => (VolumeConfig { intensity: a, ..cfg.clone() }, fixed),
    }
}

/// Sign of the φ-amplitude determinant at the top of the x_max grid.
fn pole_sign<T: Real>(cfg: &VolumeConfig<T>, x00: T) -> Result<i8> {
    let req = cfg.request(x00)?;
    let top = *cfg.grid.last().expect("non-empty grid");
    Ok(threshold_sweep(&req, &[top])?[0].amplitude_sign)
}

fn point_from<T: Real>(axis: T, est: Result<VolumeEstimate<T>>) -> ScanPoint<T> {
    match est {
        Ok(v) => ScanPoint {
            axis,
            m0: v.volume,
            pole: v.is_pole(),
            amplitude_sign: v.amplitude_sign,
            bc2_equivalent: v.bc2_equivalent,
            eta: v.fit.as_ref().map(|f| f.eta),
            diagnostic: None,
        },
        Err(e) => ScanPoint {
            axis,
            m0: T::nan(),
            pole: false,
            amplitude_sign: 0,
            bc2_equivalent: None,
            eta: None,
            diagnostic: Some(e.to_string()),
        },
    }
}

/// Steps out from a refined pole in factors of four, starting above the
/// bracket width, until both sides give pole-free traces.
fn probe_neighbors<T: Real>(
    cfg: &VolumeConfig<T>,
    kind: ScanAxis,
    fixed: T,
    position: T,
    tol: T,
    bracket: (T, T),
) -> Option<((T, T), (T, T))> {
    let reach = (position - bracket.0).min(bracket.1 - position);
    let mut h = tol * lit(4.0);
    while h < reach {
        let probe = |a: T| {
            let (c, x00) = at_axis(cfg, kind, fixed, a);
            extract_volume(&c, x00).ok().filter(|v| !v.is_pole() && v.volume.is_finite()).map(|v| (a, v.volume))
        };
        if let (Some(l), Some(r)) = (probe(position - h), probe(position + h)) {
            return Some((l, r));
        }
        h = h * lit(4.0);
    }
    None
}

fn scan_generic<T: Real>(
    cfg: &VolumeConfig<T>,
    kind: ScanAxis,
    fixed: T,
    axis: &[T],
    opts: &ScanOptions<T>,
) -> Result<(ScanCurve<T>, Vec<Resonance<T>>)> {
    if axis.is_empty() {
        return Err(Error::domain("empty scan axis"));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("scan axis must be strictly ascending"));
    }
    let points: Vec<ScanPoint<T>> = axis
        .par_iter()
        .map(|a| {
            let (c, x00) = at_axis(cfg, kind, fixed, *a);
            point_from(*a, extract_volume(&c, x00))
        })
        .collect();
    let mut finite: Vec<T> = points.iter().filter(|p| !p.pole && p.m0.is_finite()).map(|p| p.m0.abs()).collect();
    finite.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let median = finite.get(finite.len() / 2).copied();

    let mut resonances = Vec::new();
    // failed points carry no sign, so pair each signed point with the next signed one
    let signed: Vec<usize> = (0..points.len()).filter(|&i| points[i].amplitude_sign != 0).collect();
    for w in signed.windows(2) {
        let (i, j) = (w[0], w[1]);
        let (p, q) = (&points[i], &points[j]);
        if p.amplitude_sign == q.amplitude_sign {
            continue;
        }
        let (mut lo, mut hi, s_lo) = (p.axis, q.axis, p.amplitude_sign);
        let mut tol = opts.refine_tol;
        // machine-precision floor on the bracket
        let floor = lit::<T>(64.0) * T::epsilon() * p.axis.abs().max(q.axis.abs());
        let neighbors = loop {
            while hi - lo > tol {
                let mid = (lo + hi) / lit(2.0);
                let (c, x00) = at_axis(cfg, kind, fixed, mid);
                if pole_sign(&c, x00)? == s_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let nb = probe_neighbors(cfg, kind, fixed, (lo + hi) / lit(2.0), tol, (p.axis, q.axis));
            let resolved = nb.is_some_and(|((_, l), (_, r))| {
                l * r < T::zero() && l.abs().min(r.abs()) >= opts.pole_magnitude
            });
            if resolved || tol <= floor {
                break nb;
            }
            tol = (tol / lit(16.0)).max(floor);
        };
        let position = (lo + hi) / lit(2.0);
        let (left, right) = match neighbors {
            Some((l, r)) => (Some(l), Some(r)),
            None => (
                points[..=i].iter().rev().find(|p| !p.pole && p.m0.is_finite()).map(|p| (p.axis, p.m0)),
                points[j..].iter().find(|p| !p.pole && p.m0.is_finite()).map(|p| (p.axis, p.m0)),
            ),
        };
        let sign = |p: Option<(T, T)>| p.map_or(0, |(_, m)| if m < T::zero() { -1 } else { 1 });
        let width = match (left, right, median) {
            (Some(l), Some(r), Some(med)) if med > T::zero() => {
                let res = ((l.1 * (l.0 - position)).abs() + (r.1 * (r.0 - position)).abs()) / lit(2.0);
                Some(lit::<T>(2.0) * res / (lit::<T>(10.0) * med))
            }
            _ => None,
        };
        resonances.push(Resonance {
            position,
            bracket: (p.axis, q.axis),
            label: 1,
            n_appear: 1,
            sides: (sign(left), sign(right)),
            neighbors,
            width,
            ambiguous: false,
        });
    }
    let curve = ScanCurve { axis_kind: kind, points, m: cfg.m, n: cfg.n, fixed };
    Ok((curve, resonances))
}

/// M₀ across x00 at fixed intensity, with poles located by bisection.
///
/// Every pole is labeled ℓ̃ = 1 here; [`label_resonances`] assigns labels.
pub fn scan_x00<T: Real>(
    cfg: &VolumeConfig<T>,
    x00_grid: &[T],
    opts: &ScanOptions<T>,
) -> Result<(ScanCurve<T>, Vec<Resonance<T>>)> {
    scan_generic(cfg, ScanAxis::X00, cfg.intensity, x00_grid, opts)
}

/// M₀ across intensity at fixed x00.
pub fn scan_intensity<T: Real>(
    cfg: &VolumeConfig<T>,
    x00: T,
    intensities: &[T],
    opts: &ScanOptions<T>,
) -> Result<(ScanCurve<T>, Vec<Resonance<T>>)> {
    if intensities.iter().any(|i| !(*i >= T::zero())) {
        return Err(Error::domain("intensities must be non-negative"));
    }
    scan_generic(cfg, ScanAxis::Intensity, x00, intensities, opts)
}

/// Per-n scans for n = 1..=n_max.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledScan<T> {
    pub curves: Vec<ScanCurve<T>>,
    /// Poles of each n, labeled.
    pub per_n: Vec<Vec<Resonance<T>>>,
}

/// Runs [`scan_x00`] for n = 1..=n_max and labels each pole of n_max by the
/// smallest n at which it is present.
pub fn label_resonances<T: Real>(
    cfg: &VolumeConfig<T>,
    x00_grid: &[T],
    n_max: usize,
    opts: &ScanOptions<T>,
) -> Result<LabeledScan<T>> {
    if n_max == 0 {
        return Err(Error::domain("n_max must be at least 1"));
    }
    let mut curves = Vec::with_capacity(n_max);
    let mut per_n: Vec<Vec<Resonance<T>>> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (curve, mut res) = scan_x00(&VolumeConfig { n, ..cfg.clone() }, x00_grid, opts)?;
        if let Some(prev) = per_n.last() {
            let mut claimed = vec![false; prev.len()];
            // closest pairs first so a near-coincident newcomer does not steal a tracked pole
            let mut pairs: Vec<(T, usize, usize)> = Vec::new();
            for (i, r) in res.iter().enumerate() {
                for (j, p) in prev.iter().enumerate() {
                    let d = (r.position - p.position).abs();
                    if d <= opts.tracking_tol {
                        pairs.push((d, i, j));
                    }
                }
            }
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances"));
            let mut matched = vec![false; res.len()];
            for (_, i, j) in &pairs {
                if !matched[*i] && !claimed[*j] {
                    matched[*i] = true;
                    claimed[*j] = true;
                    res[*i].n_appear = prev[*j].n_appear;
                    res[*i].ambiguous = prev[*j].ambiguous;
                }
            }
            for (i, r) in res.iter_mut().enumerate() {
                let near = pairs.iter().filter(|(_, a, _)| *a == i).count();
                let near_new = pairs.iter().filter(|(_, _, j)| pairs.iter().filter(|(_, _, k)| k == j).count() > 1).any(|(_, a, _)| *a == i);
                if near > 1 || near_new {
                    r.ambiguous = true;
                }
                if !matched[i] {
                    r.n_appear = n;
                }
                r.label = 2 * r.n_appear as u32 - 1;
            }
        }
        curves.push(curve);
        per_n.push(res);
    }
    Ok(LabeledScan { curves, per_n })
}
