//! 𝓜(x_max) traces, their least-squares expansion fits, and the volume M₀.

use rayon::prelude::*;

use crate::ccsolve::{threshold_solution, threshold_sweep, GridControl, NodalLine, SolveMode, SolveRequest};
use crate::error::{Error, Result};
use crate::levy_keller::{delta_m0, Basis};
use crate::linalg::{condition_number, lstsq_refined, Mat};
use crate::potentials::{multipole_model, ChannelSet, Model};
use crate::refpairs::Bc;
use crate::scalar::{lit, to_f64, Real};

/// Everything but x00 needed to build a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeConfig<T> {
    pub m: i32,
    pub intensity: T,
    pub n: usize,
    pub bc: Bc,
    pub grid: Vec<T>,
    pub control: GridControl<T>,
    pub gamma_e: T,
    pub gamma_l: T,
    pub gamma_i: T,
    /// Largest accepted relative residual RMS.
    pub residual_threshold: T,
    pub max_condition: T,
}

impl<T: Real> VolumeConfig<T> {
    pub fn new(m: i32, intensity: T, n: usize, bc: Bc) -> Self {
        Self {
            m,
            intensity,
            n,
            bc,
            grid: log_grid(lit(20.0), lit(500.0), 50),
            control: GridControl::default(),
            gamma_e: T::zero(),
            gamma_l: T::zero(),
            gamma_i: T::zero(),
            residual_threshold: lit(1e-5),
            max_condition: lit(1e12),
        }
    }

    pub fn request(&self, x00: T) -> Result<SolveRequest<T>> {
        let top = self.grid.last().copied().ok_or_else(|| Error::domain("empty x_max grid"))?;
        Ok(SolveRequest {
            channels: ChannelSet::new(self.m, self.n)?,
            intensity: self.intensity,
            nodal: NodalLine { x00, gamma_e: self.gamma_e, gamma_l: self.gamma_l, gamma_i: self.gamma_i },
            bc: self.bc,
            x_max: top,
            control: self.control,
        })
    }

    /// The fit basis for this reference pair and projection.
    pub fn basis(&self) -> Vec<Basis> {
        default_basis(self.bc, self.m, self.intensity)
    }
}

pub fn default_basis<T: Real>(bc: Bc, m: i32, intensity: T) -> Vec<Basis> {
    use Basis::*;
    if bc == Bc::Bc23 && m == 0 && intensity > T::zero() {
        vec![X, LnX, One, InvX, LnXOverX2, InvX2]
    } else {
        vec![X2, X, LnX, One, LnXOverX, InvX, LnXOverX2, InvX2]
    }
}

/// `points` log-spaced values from lo to hi inclusive.
pub fn log_grid<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    if points < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == points {
                hi
            } else {
                (a + (b - a) * lit::<T>(i as f64) / lit::<T>((points - 1) as f64)).exp()
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MTrace<T> {
    pub samples: Vec<(T, T)>,
    pub m: i32,
    pub intensity: T,
    pub x00: T,
    pub n: usize,
    pub bc: Bc,
    /// A pole of 𝓜 lies inside the x_max range.
    pub resonant: bool,
    /// Sign of the φ-amplitude determinant at the largest x_max.
    pub amplitude_sign: i8,
}

pub fn m_trace<T: Real>(cfg: &VolumeConfig<T>, x00: T) -> Result<MTrace<T>> {
    let req = cfg.request(x00)?;
    let sols = match cfg.control.mode {
        SolveMode::Outward => threshold_sweep(&req, &cfg.grid)?,
        SolveMode::Inward => cfg
            .grid
            .par_iter()
            .map(|xm| threshold_solution(&SolveRequest { x_max: *xm, ..req.clone() }))
            .collect::<Result<Vec<_>>>()?,
    };
    let signs: Vec<i8> = sols.iter().map(|s| s.amplitude_sign).collect();
    let resonant = match cfg.control.mode {
        SolveMode::Outward => signs.windows(2).any(|w| w[0] != w[1]),
        // inward signs are not oriented between x_max values; look for a jump through infinity instead
        SolveMode::Inward => sols.windows(2).any(|w| (w[0].m_at_xmax < T::zero()) != (w[1].m_at_xmax < T::zero()) && w[0].m_at_xmax.abs().max(w[1].m_at_xmax.abs()) > lit(1e6)),
    };
    Ok(MTrace {
        samples: sols.iter().map(|s| (s.x_max, s.m_at_xmax)).collect(),
        m: cfg.m,
        intensity: cfg.intensity,
        x00,
        n: cfg.n,
        bc: cfg.bc,
        resonant,
        amplitude_sign: *signs.last().expect("non-empty grid"),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult<T> {
    pub coefficients: Vec<(Basis, T)>,
    pub residual_rms: T,
    pub condition: T,
    pub volume: T,
    pub eta: T,
}

impl<T: Real> FitResult<T> {
    pub fn coefficient(&self, b: Basis) -> Option<T> {
        self.coefficients.iter().find(|(t, _)| *t == b).map(|(_, c)| *c)
    }
}

/// Fits with the default basis and the default thresholds.
pub fn fit_expansion<T: Real>(trace: &MTrace<T>) -> Result<FitResult<T>> {
    let basis = default_basis(trace.bc, trace.m, trace.intensity);
    fit_with_basis(trace, &basis, lit(1e-5), lit(1e12))
}

pub fn fit_with_basis<T: Real>(
    trace: &MTrace<T>,
    basis: &[Basis],
    residual_threshold: T,
    max_condition: T,
) -> Result<FitResult<T>> {
    if trace.resonant {
        return Err(Error::Resonant);
    }
    let (rows, cols) = (trace.samples.len(), basis.len());
    if !basis.contains(&Basis::One) {
        return Err(Error::domain("fit basis needs the constant term"));
    }
    if rows < 3 * cols {
        return Err(Error::domain(format!("{rows} samples for {cols} basis terms; need at least {}", 3 * cols)));
    }
    let raw = Mat::from_fn(rows, cols, |i, j| basis[j].eval(trace.samples[i].0));
    let norms: Vec<T> = (0..cols)
        .map(|j| (0..rows).fold(T::zero(), |s, i| s + raw[(i, j)] * raw[(i, j)]).sqrt())
        .collect();
    let design = Mat::from_fn(rows, cols, |i, j| raw[(i, j)] / norms[j]);
    let condition = condition_number(&design);
    if !(condition <= max_condition) {
        return Err(Error::IllConditioned { condition: to_f64(condition) });
    }
    let rhs: Vec<T> = trace.samples.iter().map(|s| s.1).collect();
    let sol = lstsq_refined(&design, &rhs, 2).ok_or(Error::Singular { condition: to_f64(condition) })?;
    let fitted = design.matvec(&sol);
    let (mut rss, mut tss) = (T::zero(), T::zero());
    for (f, y) in fitted.iter().zip(&rhs) {
        rss = rss + (*f - *y) * (*f - *y);
        tss = tss + *y * *y;
    }
    let residual_rms = if tss > T::zero() { (rss / tss).sqrt() } else { rss.sqrt() };
    if !(residual_rms <= residual_threshold) {
        return Err(Error::Diagnostics(format!("fit residual {residual_rms} above threshold {residual_threshold}")));
    }
    let coefficients: Vec<(Basis, T)> = basis.iter().zip(&sol).zip(&norms).map(|((b, c), s)| (*b, *c / *s)).collect();
    let pick = |b: Basis| coefficients.iter().find(|(t, _)| *t == b).map(|(_, c)| *c);
    Ok(FitResult {
        volume: pick(Basis::One).expect("constant term present"),
        eta: pick(Basis::InvX).unwrap_or_else(T::zero),
        coefficients,
        residual_rms,
        condition,
    })
}

/// M₀ for one x00, or a signed infinity when the trace is resonant.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeEstimate<T> {
    pub x00: T,
    pub volume: T,
    pub fit: Option<FitResult<T>>,
    /// For BC23, the volume shifted to the BC2 convention via [`delta_m0`].
    pub bc2_equivalent: Option<T>,
    pub amplitude_sign: i8,
}

impl<T: Real> VolumeEstimate<T> {
    pub fn is_pole(&self) -> bool {
        self.fit.is_none()
    }
}

pub fn extract_volume<T: Real>(cfg: &VolumeConfig<T>, x00: T) -> Result<VolumeEstimate<T>> {
    let trace = m_trace(cfg, x00)?;
    if trace.resonant {
        let last = trace.samples.last().expect("non-empty trace").1;
        let volume = if last < T::zero() { T::neg_infinity() } else { T::infinity() };
        return Ok(VolumeEstimate { x00, volume, fit: None, bc2_equivalent: None, amplitude_sign: trace.amplitude_sign });
    }
    let fit = fit_with_basis(&trace, &cfg.basis(), cfg.residual_threshold, cfg.max_condition)?;
    let bc2_equivalent = if cfg.bc == Bc::Bc23 && cfg.intensity > T::zero() {
        let v = multipole_model(Model::Adiabatic, cfg.m, cfg.intensity)?;
        // the reference pair is attractive even where c3 < 0
        Some(fit.volume - delta_m0(v.c3, v.c4, v.c3.abs())?)
    } else {
        None
    };
    Ok(VolumeEstimate { x00, volume: fit.volume, fit: Some(fit), bc2_equivalent, amplitude_sign: trace.amplitude_sign })
}

/// Ordinary least squares η = α·v + β.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearRelation<T> {
    pub alpha: T,
    pub beta: T,
    pub r_squared: T,
}

pub fn linear_relation<T: Real>(v: &[T], eta: &[T]) -> Result<LinearRelation<T>> {
    if v.len() != eta.len() {
        return Err(Error::domain("v and eta samples differ in length"));
    }
    if v.len() < 10 {
        return Err(Error::domain(format!("{} samples; need at least 10", v.len())));
    }
    let nf = lit::<T>(v.len() as f64);
    let mv = v.iter().fold(T::zero(), |a, b| a + *b) / nf;
    let me = eta.iter().fold(T::zero(), |a, b| a + *b) / nf;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (x, y) in v.iter().zip(eta) {
        let (dx, dy) = (*x - mv, *y - me);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if !(sxx > T::epsilon() * mv.abs().max(T::one()) * nf) {
        return Err(Error::Singular { condition: f64::INFINITY });
    }
    let alpha = sxy / sxx;
    let r_squared = if syy > T::zero() { sxy * sxy / (sxx * syy) } else { T::one() };
    Ok(LinearRelation { alpha, beta: me - alpha * mv, r_squared })
}
