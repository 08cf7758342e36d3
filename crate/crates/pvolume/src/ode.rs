//! Adaptive explicit Runge–Kutta integration (Dormand–Prince 8(5,3)).

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

const STAGES: usize = 12;
const C: [f64; STAGES] = [0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274, 0.2816496580927726, 0.3333333333333333, 0.25, 0.3076923076923077, 0.6512820512820513, 0.6, 0.8571428571428571, 1.0];
const A: [[f64; STAGES]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0],
];
const B: [f64; STAGES] = [0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, 0.3111643669578199, -0.1521609496625161, 0.20136540080403034, 0.04471061572777259];
const E3: [f64; STAGES] = [-0.18980075407240762, 0.0, 0.0, 0.0, 0.0, 4.450312892752409, 1.8915178993145003, -5.801203960010585, -0.4226823213237919, -0.1521609496625161, 0.20136540080403034, 0.02265179219836082];
const E5: [f64; STAGES] = [0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044, -0.4957589496572502, 1.6643771824549864, -0.35032884874997366, 0.3341791187130175, 0.08192320648511571, -0.022355307863886294];

/// A first-order system y' = f(x, y).
pub trait OdeSystem<T: Real> {
    fn dim(&self) -> usize;

    fn rhs(&self, x: T, y: &[T], dy: &mut [T]);

    /// Largest admissible step at `x`.
    fn max_step(&self, _x: T) -> Option<T> {
        None
    }

    /// Per-component error scale used by the step controller.
    fn error_scale(&self, y: &[T], y_new: &[T], tol: &Tolerance<T>, out: &mut [T]) {
        for i in 0..out.len() {
            out[i] = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn new(rtol: T, atol: T) -> Self {
        Tolerance { rtol, atol, max_steps: 2_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, o: StepStats) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
    }
}

#[derive(Clone, Debug)]
pub struct Dop853<T> {
    tol: Tolerance<T>,
    c: [T; STAGES],
    a: [[T; STAGES]; STAGES],
    b: [T; STAGES],
    e3: [T; STAGES],
    e5: [T; STAGES],
}

impl<T: Real> Dop853<T> {
    pub fn new(tol: Tolerance<T>) -> Self {
        Dop853 {
            tol,
            c: C.map(lit),
            a: A.map(|row| row.map(lit)),
            b: B.map(lit),
            e3: E3.map(lit),
            e5: E5.map(lit),
        }
    }

    pub fn tolerance(&self) -> &Tolerance<T> {
        &self.tol
    }

    /// Advances `y` from `x0` to `x1` (either direction). `h_hint` carries the
    /// step size between consecutive calls.
    pub fn integrate<S: OdeSystem<T>>(
        &self,
        sys: &S,
        x0: T,
        y: &mut [T],
        x1: T,
        h_hint: &mut Option<T>,
    ) -> Result<StepStats> {
        let n = sys.dim();
        assert_eq!(y.len(), n, "state length");
        let mut stats = StepStats::default();
        if x1 == x0 {
            return Ok(stats);
        }
        let dir = if x1 > x0 { T::one() } else { -T::one() };
        let mut k: Vec<Vec<T>> = vec![vec![T::zero(); n]; STAGES];
        let mut ys = vec![T::zero(); n];
        let mut y_new = vec![T::zero(); n];
        let mut scale = vec![T::zero(); n];
        let mut x = x0;
        sys.rhs(x, y, &mut k[0]);
        let mut h_abs = match *h_hint {
            Some(h) if h > T::zero() => h,
            _ => self.initial_step(sys, x, y, x1, dir, &k[0]),
        };
        let eighth = lit::<T>(-0.125);
        let (safety, min_factor, max_factor) = (lit::<T>(0.9), lit::<T>(0.2), lit::<T>(10.0));
        let mut rejected = false;
        loop {
            if stats.accepted + stats.rejected > self.tol.max_steps {
                return Err(Error::Integration { x: to_f64(x), reason: "step budget exhausted".into() });
            }
            if let Some(hm) = sys.max_step(x) {
                h_abs = h_abs.min(hm);
            }
            let min_step = lit::<T>(10.0) * T::epsilon() * x.abs().max(T::min_positive_value());
            if h_abs < min_step {
                return Err(Error::Integration { x: to_f64(x), reason: "step size underflow".into() });
            }
            let proposal = h_abs;
            let remaining = (x1 - x).abs();
            let last = h_abs >= remaining;
            if last {
                h_abs = remaining;
            }
            let h = dir * h_abs;
            for s in 1..STAGES {
                for i in 0..n {
                    let mut acc = T::zero();
                    for j in 0..s {
                        acc = acc + self.a[s][j] * k[j][i];
                    }
                    ys[i] = y[i] + h * acc;
                }
                let (_, tail) = k.split_at_mut(s);
                sys.rhs(x + self.c[s] * h, &ys, &mut tail[0]);
            }
            for i in 0..n {
                let mut acc = T::zero();
                for j in 0..STAGES {
                    acc = acc + self.b[j] * k[j][i];
                }
                y_new[i] = y[i] + h * acc;
            }
            sys.error_scale(y, &y_new, &self.tol, &mut scale);
            let (mut e5n, mut e3n) = (T::zero(), T::zero());
            for i in 0..n {
                let (mut a5, mut a3) = (T::zero(), T::zero());
                for j in 0..STAGES {
                    a5 = a5 + self.e5[j] * k[j][i];
                    a3 = a3 + self.e3[j] * k[j][i];
                }
                let (r5, r3) = (a5 / scale[i], a3 / scale[i]);
                e5n = e5n + r5 * r5;
                e3n = e3n + r3 * r3;
            }
            let err = if e5n == T::zero() && e3n == T::zero() {
                T::zero()
            } else {
                h.abs() * e5n / ((e5n + lit::<T>(0.01) * e3n) * lit::<T>(n as f64)).sqrt()
            };
            if err.is_finite() && err < T::one() {
                stats.accepted += 1;
                let mut factor =
                    if err == T::zero() { max_factor } else { max_factor.min(safety * err.powf(eighth)) };
                if rejected {
                    factor = factor.min(T::one());
                }
                rejected = false;
                x = if last { x1 } else { x + h };
                y.copy_from_slice(&y_new);
                sys.rhs(x, y, &mut k[0]);
                if last {
                    *h_hint = Some(if h_abs < proposal { proposal } else { proposal * factor });
                    return Ok(stats);
                }
                h_abs = h_abs * factor;
            } else {
                stats.rejected += 1;
                let factor = if err.is_finite() { min_factor.max(safety * err.powf(eighth)) } else { min_factor };
                h_abs = h_abs * factor;
                rejected = true;
            }
        }
    }

    fn initial_step<S: OdeSystem<T>>(&self, sys: &S, x: T, y: &[T], x1: T, dir: T, f0: &[T]) -> T {
        let n = y.len();
        let mut sc = vec![T::zero(); n];
        sys.error_scale(y, y, &self.tol, &mut sc);
        let rms = |v: &dyn Fn(usize) -> T| -> T {
            let s = (0..n).fold(T::zero(), |acc, i| {
                let r = v(i) / sc[i];
                acc + r * r
            });
            (s / lit::<T>(n as f64)).sqrt()
        };
        let d0 = rms(&|i| y[i]);
        let d1 = rms(&|i| f0[i]);
        let tiny = lit::<T>(1e-5);
        let mut h0 = if d0 < tiny || d1 < tiny { lit::<T>(1e-6) } else { lit::<T>(0.01) * d0 / d1 };
        h0 = h0.min((x1 - x).abs());
        if let Some(hm) = sys.max_step(x) {
            h0 = h0.min(hm);
        }
        let y1: Vec<T> = (0..n).map(|i| y[i] + dir * h0 * f0[i]).collect();
        let mut f1 = vec![T::zero(); n];
        sys.rhs(x + dir * h0, &y1, &mut f1);
        let d2 = rms(&|i| f1[i] - f0[i]) / h0;
        let h1 = if d1 <= lit(1e-15) && d2 <= lit(1e-15) {
            lit::<T>(1e-6).max(h0 * lit(1e-3))
        } else {
            (lit::<T>(0.01) / d1.max(d2)).powf(lit(0.125))
        };
        (lit::<T>(100.0) * h0).min(h1)
    }
}
