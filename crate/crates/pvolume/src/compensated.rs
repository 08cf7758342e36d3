//! Double-word arithmetic built on fused multiply-add, for sampling quantities
//! whose rounding noise would otherwise dominate a downstream fit.

use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug)]
pub(crate) struct Dw<T> {
    pub hi: T,
    pub lo: T,
}

fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum<T: Real>(a: T, b: T) -> Dw<T> {
    let s = a + b;
    Dw { hi: s, lo: b - (s - a) }
}

impl<T: Real> Dw<T> {
    pub fn new(v: T) -> Self {
        Dw { hi: v, lo: T::zero() }
    }

    pub fn value(self) -> T {
        self.hi + self.lo
    }

    pub fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        quick_two_sum(s, e + self.lo + o.lo)
    }

    pub fn neg(self) -> Self {
        Dw { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        quick_two_sum(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    pub fn scale(self, s: T) -> Self {
        self.mul(Dw::new(s))
    }

    pub fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.scale(q1));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.scale(q2));
        let q3 = r.hi / o.hi;
        quick_two_sum(q1, q2).add(Dw::new(q3))
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= T::zero() {
            return Dw::new(T::zero());
        }
        let s = self.hi.sqrt();
        let r = self.sub(Dw::new(s).mul(Dw::new(s)));
        quick_two_sum(s, r.hi / (lit::<T>(2.0) * s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_lost_bits() {
        let third = Dw::new(1.0f64).div(Dw::new(3.0));
        let back = third.scale(3.0).sub(Dw::new(1.0));
        assert!(back.value().abs() < 1e-30);
        let r2 = Dw::new(2.0f64).sqrt();
        assert!(r2.mul(r2).sub(Dw::new(2.0)).value().abs() < 1e-30);
    }
}
