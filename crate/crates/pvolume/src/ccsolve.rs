//! Coupled-channel threshold solutions with a nodal-line inner boundary.
//!
//! Every channel component vanishes at its nodal position x0. The regular
//! solutions are propagated outward and periodically re-expressed on the
//! reference pairs, U = ΦA − ΨB, which keeps them independent. At each
//! requested x_max the mixing matrix K = BA⁻¹ gives 𝓜(x_max) = K₁₁. This is
//! the same linear algebra as imposing pure-channel states at x_max and
//! integrating inward, which [`SolveMode::Inward`] does literally.

use crate::error::{Error, Result};
use crate::linalg::{condition_number, Lu, Mat};
use crate::ode::{Dop853, OdeSystem, Tolerance};
use crate::potentials::{anisotropy_coupling, coupling_matrix, ChannelSet};
use crate::refpairs::{eval_pair, wronskian, Bc, RefPairSpec};
use crate::scalar::{lit, to_f64, Real};

/// Inner boundary x0(E, ℓ, 𝓘) = x00 + γ_E·E + γ_L·ℓ(ℓ+1) + γ_I·𝓘.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodalLine<T> {
    pub x00: T,
    pub gamma_e: T,
    pub gamma_l: T,
    pub gamma_i: T,
}

impl<T: Real> NodalLine<T> {
    pub fn new(x00: T) -> Self {
        Self { x00, gamma_e: T::zero(), gamma_l: T::zero(), gamma_i: T::zero() }
    }
}

pub fn nodal_position<T: Real>(nodal: &NodalLine<T>, energy: T, l: u32, intensity: T) -> Result<T> {
    let lf = lit::<T>(l as f64);
    let x0 = nodal.x00 + nodal.gamma_e * energy + nodal.gamma_l * lf * (lf + T::one()) + nodal.gamma_i * intensity;
    if x0 > T::zero() && x0.is_finite() {
        Ok(x0)
    } else {
        Err(Error::domain(format!("nodal position for l = {l} is {x0}, must be positive")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    /// Outward propagation with renormalization (default).
    Outward,
    /// Pure-channel states imposed at x_max, integrated down to the nodal line.
    Inward,
}

/// Integration control.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridControl<T> {
    pub rtol: T,
    pub atol: T,
    /// Steps stay below this fraction of the local wavelength 2π/√|W_ii|.
    pub wavelength_fraction: T,
    pub mode: SolveMode,
}

impl<T: Real> Default for GridControl<T> {
    fn default() -> Self {
        Self { rtol: lit(1e-11), atol: lit(1e-15), wavelength_fraction: lit(1.0 / 40.0), mode: SolveMode::Outward }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveRequest<T> {
    pub channels: ChannelSet,
    pub intensity: T,
    pub nodal: NodalLine<T>,
    pub bc: Bc,
    pub x_max: T,
    pub control: GridControl<T>,
}

impl<T: Real> SolveRequest<T> {
    pub fn new(channels: ChannelSet, intensity: T, x00: T, bc: Bc, x_max: T) -> Self {
        Self { channels, intensity, nodal: NodalLine::new(x00), bc, x_max, control: GridControl::default() }
    }

    fn validate(&self) -> Result<Vec<T>> {
        if !(self.intensity >= T::zero()) || !self.intensity.is_finite() {
            return Err(Error::domain(format!("intensity must be non-negative, got {}", self.intensity)));
        }
        if self.bc == Bc::Bc2k {
            return Err(Error::Unsupported("threshold solutions use BC2 or BC23".into()));
        }
        let x0: Vec<T> = self
            .channels
            .ells()
            .iter()
            .map(|l| nodal_position(&self.nodal, T::zero(), *l, self.intensity))
            .collect::<Result<_>>()?;
        let top = x0.iter().fold(T::zero(), |a, b| a.max(*b));
        if !(self.x_max > top) {
            return Err(Error::domain(format!("x_max = {} must exceed the nodal positions", self.x_max)));
        }
        Ok(x0)
    }

    /// c3f of the BC23 pair, or `None` when BC2 applies (including the 𝓘 = 0 fallback).
    fn c3f(&self) -> Option<T> {
        if self.bc != Bc::Bc23 {
            return None;
        }
        let c11: T = anisotropy_coupling(1, 1, self.channels.m()).expect("p-wave coupling exists");
        let c3f = (c11 * self.intensity).abs();
        if c3f > T::zero() {
            Some(c3f)
        } else {
            log::warn!("BC23 requested at zero intensity; using BC2");
            None
        }
    }

    fn pair(&self, channel: usize, c3f: Option<T>) -> RefPairSpec<T> {
        let l = self.channels.ells()[channel];
        match c3f {
            Some(f) if channel == 0 => RefPairSpec { bc: Bc::Bc23, l, k: T::zero(), c3f: f },
            _ => RefPairSpec::bc2(l),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSolution<T> {
    pub x_max: T,
    /// M̄¹_j′ for every channel j′.
    pub mbar: Vec<T>,
    pub m_at_xmax: T,
    /// z¹_ℓ at each nodal position.
    pub channel_values: Vec<T>,
    pub condition: T,
    /// Sign of the determinant of the accumulated φ-amplitude matrix; it
    /// flips when x00 crosses a pole of 𝓜.
    pub amplitude_sign: i8,
}

struct Coupled<'a, T> {
    ch: &'a ChannelSet,
    intensity: T,
    /// Number of solution columns carried.
    cols: usize,
    wavelength_fraction: T,
}

impl<T: Real> Coupled<'_, T> {
    fn w(&self, x: T) -> Mat<T> {
        coupling_matrix(self.ch, self.intensity, x).unwrap_or_else(|_| Mat::from_fn(self.ch.n(), self.ch.n(), |_, _| T::nan()))
    }
}

// state: U (n×cols, row-major) followed by U′
impl<T: Real> OdeSystem<T> for Coupled<'_, T> {
    fn dim(&self) -> usize {
        2 * self.ch.n() * self.cols
    }

    fn rhs(&self, x: T, y: &[T], dy: &mut [T]) {
        let n = self.ch.n();
        let half = n * self.cols;
        let w = self.w(x);
        dy[..half].copy_from_slice(&y[half..]);
        for i in 0..n {
            for c in 0..self.cols {
                let mut s = T::zero();
                for k in 0..n {
                    s = s + w[(i, k)] * y[k * self.cols + c];
                }
                dy[half + i * self.cols + c] = s;
            }
        }
    }

    fn max_step(&self, x: T) -> Option<T> {
        let w = self.w(x);
        let peak = (0..self.ch.n()).fold(T::zero(), |a, i| a.max(w[(i, i)].abs()));
        (peak > T::zero()).then(|| lit::<T>(2.0) * T::PI() / peak.sqrt() * self.wavelength_fraction)
    }

    fn error_scale(&self, y: &[T], y_new: &[T], tol: &Tolerance<T>, out: &mut [T]) {
        // columns are scaled as a whole so oscillating components near zero stay cheap
        let n = self.ch.n();
        let half = n * self.cols;
        for c in 0..self.cols {
            let mut norm = T::zero();
            for i in 0..n {
                for off in [0, half] {
                    let k = off + i * self.cols + c;
                    norm = norm.max(y[k].abs()).max(y_new[k].abs());
                }
            }
            // purely relative so that rescaled states take identical steps
            let scale = if norm > T::zero() { tol.rtol * norm } else { tol.atol };
            for i in 0..n {
                for off in [0, half] {
                    out[off + i * self.cols + c] = scale;
                }
            }
        }
    }
}

const INNER_MATCH: [f64; 11] = [0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 7.0, 10.0, 14.0];

/// Splits U = ΦA − ΨB channel by channel; returns (A, B).
fn amplitudes<T: Real>(
    u: &[T],
    n: usize,
    cols: usize,
    x: T,
    pairs: &[RefPairSpec<T>],
) -> Result<(Mat<T>, Mat<T>)> {
    let half = n * cols;
    let mut a = Mat::zeros(n, cols);
    let mut b = Mat::zeros(n, cols);
    for (i, spec) in pairs.iter().enumerate() {
        let p = eval_pair(spec, x)?;
        let w = wronskian(spec)?;
        for c in 0..cols {
            let (v, d) = (u[i * cols + c], u[half + i * cols + c]);
            a[(i, c)] = (p.dpsi * v - p.psi * d) / w;
            b[(i, c)] = (p.dphi * v - p.phi * d) / w;
        }
    }
    Ok((a, b))
}

fn right_multiply<T: Real>(u: &mut [T], n: usize, m: &Mat<T>) {
    for block in u.chunks_mut(n * n) {
        let cur = Mat::from_rows(n, n, block.to_vec());
        block.copy_from_slice(cur.matmul(m).as_slice());
    }
}

/// Initial regular states at the innermost nodal position, as (x_start, state).
fn regular_start<T: Real>(req: &SolveRequest<T>, x0: &[T], dop: &Dop853<T>) -> Result<(T, Vec<T>)> {
    let n = req.channels.n();
    let lo = x0.iter().fold(T::infinity(), |a, b| a.min(*b));
    let hi = x0.iter().fold(T::zero(), |a, b| a.max(*b));
    if lo == hi {
        let mut y = vec![T::zero(); 2 * n * n];
        for i in 0..n {
            y[n * n + i * n + i] = T::one();
        }
        return Ok((lo, y));
    }
    // fundamental 2n×2n solution from lo; conditions picked up at each x0_i
    let sys = Coupled { ch: &req.channels, intensity: req.intensity, cols: 2 * n, wavelength_fraction: req.control.wavelength_fraction };
    let mut y = vec![T::zero(); 4 * n * n];
    for i in 0..n {
        y[i * 2 * n + i] = T::one();
        y[2 * n * n + i * 2 * n + n + i] = T::one();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| x0[*a].partial_cmp(&x0[*b]).expect("finite nodal positions"));
    let mut cond = Mat::zeros(n, 2 * n);
    let (mut x, mut h) = (lo, None);
    for &i in &order {
        dop.integrate(&sys, x, &mut y, x0[i], &mut h)?;
        x = x0[i];
        for c in 0..2 * n {
            cond[(i, c)] = y[i * 2 * n + c];
        }
    }
    // null space [−C₁⁻¹C₂; I], oriented by the derivative block
    let c1 = Mat::from_fn(n, n, |i, j| cond[(i, j)]);
    let c2 = Mat::from_fn(n, n, |i, j| cond[(i, n + j)]);
    let inv = Lu::new(&c1)
        .inverse()
        .ok_or_else(|| Error::Diagnostics("nodal positions too far apart for the regular basis".into()))?;
    let top = inv.matmul(&c2);
    let null = Mat::from_fn(2 * n, n, |r, c| if r < n { -top[(r, c)] } else if r - n == c { T::one() } else { T::zero() });
    let mut out = vec![T::zero(); 2 * n * n];
    for half in 0..2 {
        for i in 0..n {
            for c in 0..n {
                let mut s = T::zero();
                for k in 0..2 * n {
                    s = s + y[half * 2 * n * n + i * 2 * n + k] * null[(k, c)];
                }
                out[half * n * n + i * n + c] = s;
            }
        }
    }
    Ok((hi, out))
}

/// Threshold solutions for every x_max in `grid` from one outward pass.
///
/// `req.x_max` is ignored; each grid value must exceed the nodal positions.
pub fn threshold_sweep<T: Real>(req: &SolveRequest<T>, grid: &[T]) -> Result<Vec<ThresholdSolution<T>>> {
    let mut probe = req.clone();
    probe.x_max = grid.iter().fold(T::zero(), |a, b| a.max(*b));
    let x0 = probe.validate()?;
    if grid.is_empty() {
        return Err(Error::domain("empty x_max grid"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("x_max grid must be strictly ascending"));
    }
    let start_top = x0.iter().fold(T::zero(), |a, b| a.max(*b));
    if !(grid[0] > start_top) {
        return Err(Error::domain("x_max grid must lie beyond the nodal positions"));
    }
    let n = req.channels.n();
    let c3f = req.c3f();
    let inner: Vec<RefPairSpec<T>> = (0..n).map(|i| req.pair(i, None)).collect();
    let outer: Vec<RefPairSpec<T>> = (0..n).map(|i| req.pair(i, c3f)).collect();
    let dop = Dop853::new(Tolerance::new(req.control.rtol, req.control.atol));
    let (mut x, mut y) = regular_start(req, &x0, &dop)?;
    let sys = Coupled { ch: &req.channels, intensity: req.intensity, cols: n, wavelength_fraction: req.control.wavelength_fraction };

    let mut stops: Vec<(T, bool)> = INNER_MATCH
        .iter()
        .map(|v| lit::<T>(*v))
        .filter(|v| *v > x && *v < grid[0])
        .map(|v| (v, false))
        .collect();
    stops.extend(grid.iter().map(|g| (*g, true)));

    let mut sign = 1i8;
    let mut h = None;
    let mut out = Vec::with_capacity(grid.len());
    for (target, record) in stops {
        dop.integrate(&sys, x, &mut y, target, &mut h)?;
        x = target;
        let pairs = if record { &outer } else { &inner };
        let (a, b) = amplitudes(&y, n, n, x, pairs)?;
        let lu = Lu::new(&a);
        let ds = lu.det_sign();
        let inv = lu.inverse().ok_or_else(|| Error::Singular { condition: f64::INFINITY })?;
        if ds < T::zero() {
            sign = -sign;
        }
        right_multiply(&mut y, n, &inv);
        if record {
            let k = b.matmul(&inv);
            let mbar = k.column(0);
            out.push(ThresholdSolution {
                x_max: x,
                m_at_xmax: mbar[0],
                mbar,
                channel_values: vec![T::zero(); n],
                condition: condition_number(&a),
                amplitude_sign: sign,
            });
        }
    }
    Ok(out)
}

/// Boundary states (f_+^j, f_−^j) at x_max: values followed by derivatives of every channel.
pub fn boundary_init<T: Real>(req: &SolveRequest<T>, j: usize) -> Result<(Vec<T>, Vec<T>)> {
    req.validate()?;
    let n = req.channels.n();
    if j == 0 || j > n {
        return Err(Error::domain(format!("channel index {j} outside 1..={n}")));
    }
    let c3f = req.c3f();
    let spec = req.pair(j - 1, c3f);
    let p = eval_pair(&spec, req.x_max)?;
    let mut plus = vec![T::zero(); 2 * n];
    let mut minus = vec![T::zero(); 2 * n];
    plus[j - 1] = p.phi;
    plus[n + j - 1] = p.dphi;
    minus[j - 1] = p.psi;
    minus[n + j - 1] = p.dpsi;
    Ok((plus, minus))
}

/// Propagates the given states (values then derivatives) from x_max inward and
/// returns the n×len matrix of channel values, row i taken at x0_i.
pub fn integrate_inward<T: Real>(req: &SolveRequest<T>, states: &[Vec<T>]) -> Result<Mat<T>> {
    let x0 = req.validate()?;
    let n = req.channels.n();
    let cols = states.len();
    if states.iter().any(|s| s.len() != 2 * n) {
        return Err(Error::domain("state vectors must hold n values and n derivatives"));
    }
    let mut y = vec![T::zero(); 2 * n * cols];
    for (c, s) in states.iter().enumerate() {
        for i in 0..n {
            y[i * cols + c] = s[i];
            y[n * cols + i * cols + c] = s[n + i];
        }
    }
    let sys = Coupled { ch: &req.channels, intensity: req.intensity, cols, wavelength_fraction: req.control.wavelength_fraction };
    let dop = Dop853::new(Tolerance::new(req.control.rtol, req.control.atol));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| x0[*b].partial_cmp(&x0[*a]).expect("finite nodal positions"));
    let mut out = Mat::zeros(n, cols);
    let (mut x, mut h) = (req.x_max, None);
    for &i in &order {
        dop.integrate(&sys, x, &mut y, x0[i], &mut h)?;
        x = x0[i];
        for c in 0..cols {
            out[(i, c)] = y[i * cols + c];
        }
    }
    Ok(out)
}

fn solve_inward<T: Real>(req: &SolveRequest<T>) -> Result<ThresholdSolution<T>> {
    let n = req.channels.n();
    let mut states = Vec::with_capacity(n + 1);
    let (plus, _) = boundary_init(req, 1)?;
    states.push(plus);
    for j in 1..=n {
        states.push(boundary_init(req, j)?.1);
    }
    let vals = integrate_inward(req, &states)?;
    // z = f₊¹ − Σ M̄_j′ f₋^j′ vanishes at every nodal position
    let g = Mat::from_fn(n, n, |i, j| vals[(i, j + 1)]);
    let rhs = vals.column(0);
    let condition = condition_number(&g);
    let lu = Lu::new(&g);
    let mbar = lu.solve_vec(&rhs).ok_or(Error::Singular { condition: to_f64(condition) })?;
    let channel_values = (0..n)
        .map(|i| rhs[i] - (0..n).fold(T::zero(), |s, j| s + g[(i, j)] * mbar[j]))
        .collect();
    Ok(ThresholdSolution {
        x_max: req.x_max,
        m_at_xmax: mbar[0],
        mbar,
        channel_values,
        condition,
        amplitude_sign: if lu.det_sign() < T::zero() { -1 } else { 1 },
    })
}

/// 𝓜(x_max) and the mixing coefficients for one request.
pub fn threshold_solution<T: Real>(req: &SolveRequest<T>) -> Result<ThresholdSolution<T>> {
    match req.control.mode {
        SolveMode::Inward => solve_inward(req),
        SolveMode::Outward => {
            let mut v = threshold_sweep(req, &[req.x_max])?;
            Ok(v.pop().expect("one grid point"))
        }
    }
}

/// Single field-free channel at threshold: (u, u′) at `x_end` for u(x0) = 0, u′(x0) = 1.
pub fn field_free_regular<T: Real>(l: u32, x0: T, x_end: T, control: &GridControl<T>) -> Result<(T, T)> {
    if !(x0 > T::zero()) || !(x_end > x0) {
        return Err(Error::domain(format!("need 0 < x0 < x_end, got {x0}, {x_end}")));
    }
    struct Single<T> {
        centrifugal: T,
        fraction: T,
    }
    impl<T: Real> Single<T> {
        fn w(&self, x: T) -> T {
            let x2 = x * x;
            self.centrifugal / x2 - T::one() / (x2 * x2 * x2)
        }
    }
    impl<T: Real> OdeSystem<T> for Single<T> {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, x: T, y: &[T], dy: &mut [T]) {
            dy[0] = y[1];
            dy[1] = self.w(x) * y[0];
        }
        fn max_step(&self, x: T) -> Option<T> {
            let w = self.w(x).abs();
            (w > T::zero()).then(|| lit::<T>(2.0) * T::PI() / w.sqrt() * self.fraction)
        }
        fn error_scale(&self, y: &[T], y_new: &[T], tol: &Tolerance<T>, out: &mut [T]) {
            let norm = y.iter().chain(y_new).fold(T::zero(), |a, b| a.max(b.abs()));
            out.iter_mut().for_each(|o| *o = tol.atol + tol.rtol * norm);
        }
    }
    let lf = lit::<T>(l as f64);
    let sys = Single { centrifugal: lf * (lf + T::one()), fraction: control.wavelength_fraction };
    let dop = Dop853::new(Tolerance::new(control.rtol, control.atol));
    let mut y = vec![T::zero(), T::one()];
    dop.integrate(&sys, x0, &mut y, x_end, &mut None)?;
    Ok((y[0], y[1]))
}
