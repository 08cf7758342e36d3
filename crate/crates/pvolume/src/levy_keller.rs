//! Two-potential (Levy–Keller) description of the p-wave solution.
//!
//! The solution is written u = 𝓐(φ − ψ𝓜) on a reference pair (φ, ψ). This
//! module holds the closed-form large-x expansions of 𝓜, 𝓐 and u at
//! threshold, the Riccati and amplitude equations as numerical integrators,
//! and the low-energy phase-shift formulas.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ode::{Dop853, OdeSystem, Tolerance};
use crate::potentials::Multipole;
use crate::refpairs::{eval_pair, wronskian, Bc, RefPairSpec};
use crate::scalar::{lit, to_f64, Real};
use crate::specfun::{spherical_table, EULER_GAMMA};

/// A term of the large-x expansions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X2,
    X,
    LnX,
    One,
    LnXOverX,
    InvX,
    LnXOverX2,
    InvX2,
    InvX3,
}

impl Basis {
    pub const ALL: [Basis; 9] = [
        Basis::X2,
        Basis::X,
        Basis::LnX,
        Basis::One,
        Basis::LnXOverX,
        Basis::InvX,
        Basis::LnXOverX2,
        Basis::InvX2,
        Basis::InvX3,
    ];

    pub fn eval<T: Real>(self, x: T) -> T {
        match self {
            Basis::X2 => x * x,
            Basis::X => x,
            Basis::LnX => x.ln(),
            Basis::One => T::one(),
            Basis::LnXOverX => x.ln() / x,
            Basis::InvX => T::one() / x,
            Basis::LnXOverX2 => x.ln() / (x * x),
            Basis::InvX2 => T::one() / (x * x),
            Basis::InvX3 => T::one() / (x * x * x),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Basis::X2 => "x^2",
            Basis::X => "x",
            Basis::LnX => "ln x",
            Basis::One => "1",
            Basis::LnXOverX => "ln x/x",
            Basis::InvX => "1/x",
            Basis::LnXOverX2 => "ln x/x^2",
            Basis::InvX2 => "1/x^2",
            Basis::InvX3 => "1/x^3",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Basis::ALL
            .into_iter()
            .find(|b| b.tag() == s.trim())
            .ok_or_else(|| Error::domain(format!("unknown basis term '{s}'")))
    }
}

/// Coefficients of a truncated large-x expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticExpansion<T> {
    pub terms: Vec<(Basis, T)>,
    /// The free constant, when the expansion carries one.
    pub m0: Option<T>,
}

impl<T: Real> AsymptoticExpansion<T> {
    fn from_terms(terms: Vec<(Basis, T)>, m0: Option<T>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0), "basis tags unique and ordered");
        Self { terms, m0 }
    }

    pub fn coefficient(&self, b: Basis) -> Option<T> {
        self.terms.iter().find(|(t, _)| *t == b).map(|(_, c)| *c)
    }

    pub fn eval(&self, x: T) -> T {
        self.terms.iter().fold(T::zero(), |acc, (b, c)| acc + *c * b.eval(x))
    }
}

fn r<T: Real>(n: f64, d: f64) -> T {
    lit::<T>(n) / lit::<T>(d)
}

fn check_threshold_bc<T: Real>(bc: Bc, c3f: T) -> Result<()> {
    match bc {
        Bc::Bc2 => Ok(()),
        Bc::Bc23 if c3f > T::zero() && c3f.is_finite() => Ok(()),
        Bc::Bc23 => Err(Error::domain(format!("BC23 needs c3f > 0, got {c3f}"))),
        Bc::Bc2k => Err(Error::Unsupported("threshold expansions need BC2 or BC23".into())),
    }
}

/// Expansion of 𝓜(x) through 1/x for ℓ = 1.
pub fn m_expansion<T: Real>(v: &Multipole<T>, bc: Bc, c3f: T, m0: T) -> Result<AsymptoticExpansion<T>> {
    check_threshold_bc(bc, c3f)?;
    let (c3, c4, c5, c6) = (v.c3, v.c4, v.c5, v.c6);
    let (a, b) = alpha_beta(v, bc, c3f)?;
    let terms = match bc {
        Bc::Bc2 => vec![
            (Basis::X2, -c3 / lit(6.0)),
            (Basis::X, -(c3 * c3 / lit(9.0) + c4 / lit(3.0))),
            (Basis::LnX, -(c3 * c3 * c3 / lit(12.0) + c3 * c4 / lit(3.0) + c5 / lit(3.0))),
            (Basis::One, m0),
            (
                Basis::LnXOverX,
                c3.powi(4) / lit(18.0) + r::<T>(2.0, 9.0) * c3 * c3 * c4 + r::<T>(2.0, 9.0) * c3 * c5,
            ),
            (Basis::InvX, a * m0 + b),
        ],
        _ => {
            let f = c3f;
            let d = c3 - f;
            vec![
                (Basis::X2, -d / lit(6.0)),
                (Basis::X, -(d * d / lit(9.0) + d * f / lit(3.0) + c4 / lit(3.0))),
                (
                    Basis::LnX,
                    -((c3 * c3 * c3 - f * f * f) / lit(12.0) + c3 * c4 / lit(3.0) + c5 / lit(3.0)),
                ),
                (Basis::One, m0),
                (
                    Basis::LnXOverX,
                    d * (c3 * c3 * c3 / lit(18.0) + r::<T>(2.0, 9.0) * c3 * c4 + r::<T>(2.0, 9.0) * c5),
                ),
                (Basis::InvX, a * m0 + b),
            ]
        }
    };
    let _ = c6;
    Ok(AsymptoticExpansion::from_terms(terms, Some(m0)))
}

/// (α, β) with the 1/x coefficient of 𝓜 equal to α·M0 + β.
pub fn alpha_beta<T: Real>(v: &Multipole<T>, bc: Bc, c3f: T) -> Result<(T, T)> {
    check_threshold_bc(bc, c3f)?;
    let (c3, c4, c5, c6) = (v.c3, v.c4, v.c5, v.c6);
    let common = r::<T>(2.0, 9.0) * c4 * c4 + c3 * c5 / lit(3.0) + c6 / lit(3.0);
    Ok(match bc {
        Bc::Bc2 => (
            -r::<T>(2.0, 3.0) * c3,
            r::<T>(11.0, 162.0) * c3.powi(4) + r::<T>(37.0, 108.0) * c3 * c3 * c4 + common,
        ),
        _ => {
            let f = c3f;
            let d = c3 - f;
            let f3 = f * f * f;
            let beta = d
                * (r::<T>(11.0, 162.0) * c3 * c3 * c3
                    + c3 * c3 * f / lit(72.0)
                    + c3 * f * f / lit(135.0)
                    + r::<T>(491.0, 3240.0) * f3
                    + r::<T>(5.0, 54.0) * c3 * c4
                    - r::<T>(7.0, 108.0) * f * c4)
                + common
                - d * f3 * lit::<T>(EULER_GAMMA) / lit(9.0)
                - d * f3 * f.ln() / lit(18.0)
                + c3 * c3 * c4 / lit(4.0);
            (-r::<T>(2.0, 3.0) * d, beta)
        }
    })
}

/// Expansion of 𝓐(x) through 1/x³, normalized to 𝓐 → 1.
pub fn a_expansion<T: Real>(v: &Multipole<T>, bc: Bc, c3f: T) -> Result<AsymptoticExpansion<T>> {
    check_threshold_bc(bc, c3f)?;
    let (c3, c4, c5) = (v.c3, v.c4, v.c5);
    let f = if bc == Bc::Bc2 { T::zero() } else { c3f };
    let d = c3 - f;
    let terms = vec![
        (Basis::One, T::one()),
        (Basis::InvX, d / lit(3.0)),
        (Basis::InvX2, d * d / lit(12.0) + f * d / lit(24.0) + c4 / lit(6.0)),
        (
            Basis::InvX3,
            d * d * d / lit(36.0)
                + d * d * f / lit(24.0)
                + d * f * f / lit(60.0)
                + c4 * d / lit(9.0)
                + c4 * f / lit(36.0)
                + c5 / lit(9.0),
        ),
    ];
    Ok(AsymptoticExpansion::from_terms(terms, None))
}

/// M0(BC23) − M0(BC2) for a reference potential −c3f/x³.
pub fn delta_m0<T: Real>(c3: T, c4: T, c3f: T) -> Result<T> {
    if !(c3f > T::zero()) {
        return Err(Error::domain(format!("c3f must be positive, got {c3f}")));
    }
    let f = c3f;
    Ok(-r::<T>(2.0, 9.0) * f * c4 - r::<T>(11.0, 144.0) * c3 * c3 * f - c3 * f * f / lit(24.0)
        + (r::<T>(83.0, 432.0) - lit::<T>(EULER_GAMMA) / lit(6.0) - f.ln() / lit(12.0)) * f * f * f)
}

/// Expansion of the threshold wave function u(x) through 1/x².
pub fn u_expansion<T: Real>(v: &Multipole<T>, bc: Bc, c3f: T, m0: T) -> Result<AsymptoticExpansion<T>> {
    check_threshold_bc(bc, c3f)?;
    let (c3, c4, c5, c6) = (v.c3, v.c4, v.c5, v.c6);
    let q = match bc {
        Bc::Bc2 => -m0,
        _ => -m0 + delta_m0(c3, c4, c3f)?,
    };
    let c3sq = c3 * c3;
    let terms = vec![
        (Basis::X2, T::one()),
        (Basis::X, c3 / lit(2.0)),
        (Basis::One, c3sq / lit(4.0) + c4 / lit(2.0)),
        (Basis::LnXOverX, c3sq * c3 / lit(12.0) + c3 * c4 / lit(3.0) + c5 / lit(3.0)),
        (Basis::InvX, r::<T>(17.0, 216.0) * c3sq * c3 + c3 * c4 / lit(4.0) + c5 / lit(9.0) + q),
        (Basis::LnXOverX2, -(c3sq * c3sq / lit(48.0) + c3sq * c4 / lit(12.0) + c3 * c5 / lit(12.0))),
        (
            Basis::InvX2,
            -(r::<T>(79.0, 1728.0) * c3sq * c3sq
                + r::<T>(11.0, 48.0) * c3sq * c4
                + c4 * c4 / lit(8.0)
                + c6 / lit(4.0)
                + r::<T>(37.0, 144.0) * c3 * c5
                + c3 * q / lit(4.0)),
        ),
    ];
    Ok(AsymptoticExpansion::from_terms(terms, Some(m0)))
}

/// A divergence of 𝓜 located between two abscissae.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoleEvent<T> {
    pub lo: T,
    pub hi: T,
}

/// Output of [`ricatti_integrate`]: 𝓜 at the requested points, in the order given.
#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiTrace<T> {
    pub points: Vec<(T, T)>,
    pub poles: Vec<PoleEvent<T>>,
    pub anchor: (T, T),
}

/// Step control for the Riccati and amplitude integrators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiccatiOptions<T> {
    pub rtol: T,
    pub atol: T,
    /// Largest ratio between consecutive checkpoints, where the 𝓜 ↔ 1/𝓜 switch is decided.
    pub chunk_ratio: T,
}

impl<T: Real> Default for RiccatiOptions<T> {
    fn default() -> Self {
        Self { rtol: lit(1e-13), atol: lit(1e-14), chunk_ratio: lit(1.02) }
    }
}

struct Riccati<'a, T> {
    v: &'a Multipole<T>,
    spec: &'a RefPairSpec<T>,
    w: T,
    reciprocal: bool,
    amplitude: bool,
    /// Absolute-tolerance scale, capped at 1: |φ/ψ| for 𝓜, |ψ/φ| for 1/𝓜.
    scale: T,
}

impl<T: Real> Riccati<'_, T> {
    fn coupling(&self, x: T) -> T {
        -(self.v.interaction(x) - self.spec.potential(x)) / self.w
    }
}

impl<T: Real> OdeSystem<T> for Riccati<'_, T> {
    fn dim(&self) -> usize {
        if self.amplitude {
            2
        } else {
            1
        }
    }

    fn rhs(&self, x: T, y: &[T], dy: &mut [T]) {
        let p = match eval_pair(self.spec, x) {
            Ok(p) => p,
            Err(_) => {
                dy.iter_mut().for_each(|d| *d = T::nan());
                return;
            }
        };
        let r = self.coupling(x);
        // s = φ − ψ𝓜 (direct) or φ𝓝 − ψ with 𝓝 = 1/𝓜
        if self.reciprocal {
            let s = p.phi * y[0] - p.psi;
            dy[0] = -r * s * s;
            if self.amplitude {
                dy[1] = r * p.psi * s / y[0];
            }
        } else {
            let s = p.phi - p.psi * y[0];
            dy[0] = r * s * s;
            if self.amplitude {
                dy[1] = r * p.psi * s;
            }
        }
    }

    fn error_scale(&self, y: &[T], y_new: &[T], tol: &Tolerance<T>, out: &mut [T]) {
        out[0] = tol.atol * self.scale + tol.rtol * y[0].abs().max(y_new[0].abs());
        if self.amplitude {
            out[1] = tol.atol + tol.rtol * y[1].abs().max(y_new[1].abs());
        }
    }
}

/// Decides whether 𝓜 should be carried as its reciprocal at x.
fn wants_reciprocal<T: Real>(spec: &RefPairSpec<T>, x: T, m_or_n: T, reciprocal: bool) -> Result<bool> {
    let p = eval_pair(spec, x)?;
    let (phi, psi) = (p.phi.abs(), p.psi.abs());
    let two = lit::<T>(2.0);
    Ok(if reciprocal {
        // stay reciprocal unless |𝓜ψ| < |φ|/2
        !(psi < m_or_n.abs() * phi / two)
    } else {
        m_or_n.abs() * psi > two * phi
    })
}

struct Sweep<T> {
    x: T,
    y: Vec<T>,
    reciprocal: bool,
    h: Option<T>,
}

fn sweep_to<T: Real>(
    sys_v: &Multipole<T>,
    spec: &RefPairSpec<T>,
    w: T,
    amplitude: bool,
    st: &mut Sweep<T>,
    target: T,
    opts: &RiccatiOptions<T>,
    poles: &mut Vec<PoleEvent<T>>,
) -> Result<()> {
    let dop = Dop853::new(Tolerance::new(opts.rtol, opts.atol));
    while st.x != target {
        let up = target > st.x;
        let p = eval_pair(spec, st.x)?;
        let r = -(sys_v.interaction(st.x) - spec.potential(st.x)) / w;
        // the carried variable can diverge within 1/(|R|·|ψ(ψ𝓜 − φ)|) (or the reciprocal
        // analogue); keep chunks well inside that
        let y = st.y[0];
        let (a, b) = if st.reciprocal { (p.psi, p.phi) } else { (p.phi, p.psi) };
        let rate = r.abs() * (b * (b * y - a)).abs().max((p.phi * p.psi).abs());
        let mut width = if up { st.x * (opts.chunk_ratio - T::one()) } else { st.x * (T::one() - T::one() / opts.chunk_ratio) };
        if rate > T::zero() {
            width = width.min(lit::<T>(0.05) / rate);
        }
        let next = if up { (st.x + width).min(target) } else { (st.x - width).max(target) };
        let ratio = (p.phi / p.psi).abs();
        let scale = if st.reciprocal { T::one() / ratio } else { ratio }.min(T::one());
        let sys = Riccati { v: sys_v, spec, w, reciprocal: st.reciprocal, amplitude, scale };
        let before = st.y[0];
        dop.integrate(&sys, st.x, &mut st.y, next, &mut st.h)?;
        if st.reciprocal && before != T::zero() && (before < T::zero()) != (st.y[0] < T::zero()) {
            let (lo, hi) = if up { (st.x, next) } else { (next, st.x) };
            poles.push(PoleEvent { lo, hi });
        }
        st.x = next;
        let flip = wants_reciprocal(spec, st.x, st.y[0], st.reciprocal)?;
        if flip != st.reciprocal && st.y[0] != T::zero() {
            st.y[0] = T::one() / st.y[0];
            st.reciprocal = flip;
        }
    }
    Ok(())
}

fn value_of<T: Real>(st: &Sweep<T>) -> T {
    if st.reciprocal {
        if st.y[0] == T::zero() {
            T::infinity()
        } else {
            T::one() / st.y[0]
        }
    } else {
        st.y[0]
    }
}

fn check_grid<T: Real>(anchor_x: T, grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("empty x grid"));
    }
    if grid.iter().any(|x| !(*x > T::zero()) || !x.is_finite()) {
        return Err(Error::domain("grid abscissae must be positive"));
    }
    let lo = grid.iter().fold(T::infinity(), |a, b| a.min(*b));
    let hi = grid.iter().fold(T::neg_infinity(), |a, b| a.max(*b));
    if anchor_x < lo || anchor_x > hi {
        return Err(Error::domain(format!("anchor {anchor_x} outside grid range [{lo}, {hi}]")));
    }
    Ok(())
}

fn run_sweeps<T: Real>(
    v: &Multipole<T>,
    spec: &RefPairSpec<T>,
    anchor_x: T,
    anchor: Vec<T>,
    grid: &[T],
    amplitude: bool,
    opts: &RiccatiOptions<T>,
) -> Result<(Vec<Vec<T>>, Vec<PoleEvent<T>>)> {
    spec.validate()?;
    check_grid(anchor_x, grid)?;
    let w = wronskian(spec)?;
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|a, b| grid[*a].partial_cmp(&grid[*b]).expect("finite grid"));
    let mut out = vec![Vec::new(); grid.len()];
    let mut poles = Vec::new();
    let start = |y: &[T]| -> Result<Sweep<T>> {
        let rec = wants_reciprocal(spec, anchor_x, y[0], false)?;
        let mut y = y.to_vec();
        if rec {
            y[0] = T::one() / y[0];
        }
        Ok(Sweep { x: anchor_x, y, reciprocal: rec, h: None })
    };
    let record = |st: &Sweep<T>| -> Vec<T> {
        let mut v = vec![value_of(st)];
        v.extend_from_slice(&st.y[1..]);
        v
    };
    // downward from the anchor
    let mut st = start(&anchor)?;
    for &i in order.iter().rev().filter(|i| grid[**i] <= anchor_x) {
        sweep_to(v, spec, w, amplitude, &mut st, grid[i], opts, &mut poles)?;
        out[i] = record(&st);
    }
    let mut st = start(&anchor)?;
    for &i in order.iter().filter(|i| grid[**i] > anchor_x) {
        sweep_to(v, spec, w, amplitude, &mut st, grid[i], opts, &mut poles)?;
        out[i] = record(&st);
    }
    poles.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite pole bracket"));
    Ok((out, poles))
}

/// Integrates d𝓜/dx = −(V − V_f)/W·(φ − ψ𝓜)² from 𝓜(anchor_x) = anchor_m.
///
/// Where |ψ𝓜| outgrows |φ| the equation is carried for 1/𝓜 instead, so
/// divergences are crossed and reported as [`PoleEvent`]s.
pub fn ricatti_integrate<T: Real>(
    v: &Multipole<T>,
    spec: &RefPairSpec<T>,
    anchor_x: T,
    anchor_m: T,
    x_grid: &[T],
) -> Result<RiccatiTrace<T>> {
    ricatti_integrate_with(v, spec, anchor_x, anchor_m, x_grid, &RiccatiOptions::default())
}

pub fn ricatti_integrate_with<T: Real>(
    v: &Multipole<T>,
    spec: &RefPairSpec<T>,
    anchor_x: T,
    anchor_m: T,
    x_grid: &[T],
    opts: &RiccatiOptions<T>,
) -> Result<RiccatiTrace<T>> {
    let (vals, poles) = run_sweeps(v, spec, anchor_x, vec![anchor_m], x_grid, false, opts)?;
    Ok(RiccatiTrace {
        points: x_grid.iter().zip(vals).map(|(x, v)| (*x, v[0])).collect(),
        poles,
        anchor: (anchor_x, anchor_m),
    })
}

/// Integrates d ln𝓐/dx = −(V − V_f)/W·ψ(φ − ψ𝓜) alongside 𝓜.
///
/// 𝓜 is restarted from the anchor of `m_trace`. The result is scaled so that
/// 𝓐 at the largest grid point equals its expansion tail (or 1 for BC2k).
pub fn amplitude_integrate<T: Real>(
    v: &Multipole<T>,
    spec: &RefPairSpec<T>,
    m_trace: &RiccatiTrace<T>,
    x_grid: &[T],
) -> Result<Vec<(T, T)>> {
    let opts = RiccatiOptions::default();
    let (ax, am) = m_trace.anchor;
    let mut grid = x_grid.to_vec();
    if !grid.iter().any(|x| *x == ax) {
        grid.push(ax);
    }
    let (vals, poles) = run_sweeps(v, spec, ax, vec![am, T::zero()], &grid, true, &opts)?;
    if let Some(p) = poles.first() {
        return Err(Error::Pole { lo: to_f64(p.lo), hi: to_f64(p.hi) });
    }
    let (top_i, top_x) = x_grid
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |acc, (i, x)| if *x > acc.1 { (i, *x) } else { acc });
    let tail = match (spec.bc, spec.l) {
        (Bc::Bc2 | Bc::Bc23, 1) => a_expansion(v, spec.bc, spec.c3f)?.eval(top_x),
        _ => T::one(),
    };
    let shift = tail.ln() - vals[top_i][1];
    Ok(x_grid.iter().zip(&vals).map(|(x, v)| (*x, (v[1] + shift).exp())).collect())
}

/// Short-range phase data for the low-energy phase formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseParams<T> {
    pub d: T,
    pub t0: T,
    pub k: T,
}

impl<T: Real> PhaseParams<T> {
    pub fn new(d: T, t0: T, k: T) -> Result<Self> {
        if !(d > T::zero()) || !(k > T::zero()) {
            return Err(Error::domain(format!("need d > 0 and k > 0, got d = {d}, k = {k}")));
        }
        Ok(Self { d, t0, k })
    }
}

/// First-order p-wave phase tangent for a −c3/x³ tail beyond d, short-range tangent t0 at d.
pub fn low_energy_phase<T: Real>(c3: T, p: &PhaseParams<T>) -> T {
    let (d, t0, k) = (p.d, p.t0, p.k);
    if k * d > lit(0.5) {
        log::warn!("k*d = {} is not small; the low-energy phase formula is outside its regime", k * d);
    }
    let (k2, k3, d2) = (k * k, k * k * k, d * d);
    c3 * (k / lit(4.0) - d2 * k3 / lit(18.0))
        + t0 * (T::one() + lit::<T>(2.0) * c3 / (lit::<T>(3.0) * d) - lit::<T>(4.0) * c3 * d * k2 / lit(15.0))
        + t0 * t0
            * c3
            * (T::one() / (lit::<T>(4.0) * d2 * d2 * k3) + T::one() / (lit::<T>(2.0) * d2 * k) - k / lit(4.0)
                + d2 * k3 / lit(18.0))
}

/// k·∫ΦΨ/ρ³ dρ for (φφ, φψ, ψψ) of the ℓ = 1 free pair, with c3 factored out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationIntegrals<T> {
    pub phiphi: T,
    pub phipsi: T,
    pub psipsi: T,
}

impl<T: Real> PerturbationIntegrals<T> {
    /// tan δ to first order in c3 from these integrals.
    pub fn assemble(&self, c3: T, t0: T) -> T {
        t0 + c3 * (self.phiphi + lit::<T>(2.0) * t0 * self.phipsi + t0 * t0 * self.psipsi)
    }
}

const GAUSS_POINTS: usize = 20;
const QUAD_PANEL: f64 = 0.5;
const QUAD_SPLIT: f64 = 200.0;

fn gauss_legendre<T: Real>(n: usize) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(n);
    let nf = lit::<T>(n as f64);
    for i in 0..n {
        let mut z = (T::PI() * (lit::<T>(i as f64) + lit(0.75)) / (nf + lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (mut p0, mut p1) = (T::one(), z);
            for j in 2..=n {
                let jf = lit::<T>(j as f64);
                let p2 = ((lit::<T>(2.0) * jf - T::one()) * z * p1 - (jf - T::one()) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - T::one());
            let dz = p1 / dp;
            z = z - dz;
            if dz.abs() <= T::epsilon() {
                break;
            }
        }
        out.push((z, lit::<T>(2.0) / ((T::one() - z * z) * dp * dp)));
    }
    out
}

fn integrand<T: Real>(rho: T) -> Result<(T, T, T)> {
    let (j, y) = spherical_table(2, rho)?;
    let phi = rho * j[1];
    let psi = -rho * y[1];
    let r3 = rho * rho * rho;
    Ok((phi * phi / r3, phi * psi / r3, psi * psi / r3))
}

/// ∫_X^∞ of cos 2ρ / ρ^p and sin 2ρ / ρ^p by repeated integration by parts.
fn oscillatory_tail<T: Real>(p: i32, x: T) -> (T, T) {
    // E(p) = ∫ e^{2iρ}/ρ^p = e^{2iX}/(X^p)·(i/2)·Σ_n (p)_n (−i/(2X))^n
    let (mut re, mut im) = (T::zero(), T::zero());
    let (mut tr, mut ti) = (T::zero(), lit::<T>(0.5));
    for n in 0..12 {
        re = re + tr;
        im = im + ti;
        // multiply by (p + n)·(−i)/(2X)
        let f = lit::<T>((p + n) as f64) / (lit::<T>(2.0) * x);
        let (nr, ni) = (ti * f, -tr * f);
        tr = nr;
        ti = ni;
    }
    let (c, s) = ((lit::<T>(2.0) * x).cos(), (lit::<T>(2.0) * x).sin());
    let scale = x.powi(-p);
    ((c * re - s * im) * scale, (s * re + c * im) * scale)
}

fn tails<T: Real>(x: T) -> (T, T, T) {
    let pow_tail = |p: i32| x.powi(1 - p) / lit::<T>((p - 1) as f64);
    let (c3, s3) = oscillatory_tail(3, x);
    let (c4, s4) = oscillatory_tail(4, x);
    let (c5, s5) = oscillatory_tail(5, x);
    let half = lit::<T>(0.5);
    let pp = half * (pow_tail(5) - c5) - s4 + half * (pow_tail(3) + c3);
    let pq = half * s5 - c4 - half * s3;
    let qq = half * (pow_tail(5) + c5) + s4 + half * (pow_tail(3) - c3);
    (pp, pq, qq)
}

/// The perturbation integrals from k·d to infinity.
pub fn perturbation_integrals<T: Real>(d: T, k: T) -> Result<PerturbationIntegrals<T>> {
    perturbation_integrals_between(d, k, None)
}

/// The perturbation integrals from k·d to k·x_upper (to infinity for `None`).
pub fn perturbation_integrals_between<T: Real>(d: T, k: T, x_upper: Option<T>) -> Result<PerturbationIntegrals<T>> {
    if !(d > T::zero()) || !(k > T::zero()) {
        return Err(Error::domain(format!("need d > 0 and k > 0, got d = {d}, k = {k}")));
    }
    let lo = k * d;
    let hi = match x_upper {
        Some(x) if x * k <= lo => return Err(Error::domain("upper limit below k·d")),
        Some(x) => x * k,
        None => lo.max(lit(QUAD_SPLIT)),
    };
    let nodes = gauss_legendre::<T>(GAUSS_POINTS);
    let (mut a, mut b, mut c) = (T::zero(), T::zero(), T::zero());
    let mut left = lo;
    let panel = lit::<T>(QUAD_PANEL);
    while left < hi {
        // geometric panels near a small lower limit, uniform beyond
        let width = (left * lit(0.5)).min(panel).max(left * lit(1e-3));
        let right = (left + width).min(hi);
        let (mid, half) = ((left + right) / lit(2.0), (right - left) / lit(2.0));
        for (z, w) in &nodes {
            let (f1, f2, f3) = integrand(mid + half * *z)?;
            a = a + *w * half * f1;
            b = b + *w * half * f2;
            c = c + *w * half * f3;
        }
        left = right;
    }
    if x_upper.is_none() {
        let (t1, t2, t3) = tails(hi);
        a = a + t1;
        b = b + t2;
        c = c + t3;
    }
    let out = PerturbationIntegrals { phiphi: k * a, phipsi: k * b, psipsi: k * c };
    if !(out.phiphi.is_finite() && out.phipsi.is_finite() && out.psipsi.is_finite()) {
        return Err(Error::Diagnostics("perturbation quadrature produced a non-finite value".into()));
    }
    Ok(out)
}
