//! Truncated Taylor series in one complex variable.
//!
//! A [`Jet`] stores `f(s), f'(s), f''(s)/2!, f'''(s)/3!` at a fixed point, so
//! products and quotients of jets propagate derivatives exactly up to third
//! order. Evaluators use this to return a value and its derivatives from one
//! pass over the series.

use num_complex::Complex64;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

pub const JET_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub c: [Complex64; JET_LEN],
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl Jet {
    pub fn zero() -> Self {
        Jet { c: [ZERO; JET_LEN] }
    }

    pub fn constant(v: Complex64) -> Self {
        let mut c = [ZERO; JET_LEN];
        c[0] = v;
        Jet { c }
    }

    /// The identity map `s ↦ s` expanded at `s`.
    pub fn variable(s: Complex64) -> Self {
        let mut c = [ZERO; JET_LEN];
        c[0] = s;
        c[1] = Complex64::new(1.0, 0.0);
        Jet { c }
    }

    /// `exp(-s L)` for real `L`, expanded at `s`.
    pub fn exp_neg_scaled(s: Complex64, l: f64) -> Self {
        let v = (-s * l).exp();
        let mut c = [ZERO; JET_LEN];
        let mut f = v;
        for (k, ck) in c.iter_mut().enumerate() {
            if k > 0 {
                f = f * (-l) / k as f64;
            }
            *ck = f;
        }
        Jet { c }
    }

    pub fn exp(self) -> Self {
        // e^{a0 + h(s)} with h having zero constant term; recurrence
        // k b_k = sum_{j=1}^k j a_j b_{k-j}
        let mut b = [ZERO; JET_LEN];
        b[0] = self.c[0].exp();
        for k in 1..JET_LEN {
            let mut acc = ZERO;
            for j in 1..=k {
                acc += self.c[j] * b[k - j] * j as f64;
            }
            b[k] = acc / k as f64;
        }
        Jet { c: b }
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    /// `order`-th derivative (not divided by the factorial).
    pub fn derivative(&self, order: usize) -> Complex64 {
        let fact = (1..=order).product::<usize>() as f64;
        self.c[order] * fact
    }

    /// Jet of `f'` from a jet of `f`; the top coefficient is lost.
    pub fn differentiate(&self) -> Self {
        let mut c = [ZERO; JET_LEN];
        for (k, slot) in c.iter_mut().take(JET_LEN - 1).enumerate() {
            *slot = self.c[k + 1] * (k + 1) as f64;
        }
        Jet { c }
    }

    pub fn scale(self, k: Complex64) -> Self {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x *= k;
        }
        Jet { c }
    }

    pub fn conj(self) -> Self {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x = x.conj();
        }
        Jet { c }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c.iter()) {
            *x += y;
        }
        Jet { c }
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, o: Jet) {
        for (x, y) in self.c.iter_mut().zip(o.c.iter()) {
            *x += y;
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x = -*x;
        }
        Jet { c }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [ZERO; JET_LEN];
        for (k, ck) in c.iter_mut().enumerate() {
            for j in 0..=k {
                *ck += self.c[j] * o.c[k - j];
            }
        }
        Jet { c }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let mut q = [ZERO; JET_LEN];
        for k in 0..JET_LEN {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= o.c[j] * q[k - j];
            }
            q[k] = acc / o.c[0];
        }
        Jet { c: q }
    }
}

impl Mul<Complex64> for Jet {
    type Output = Jet;
    fn mul(self, k: Complex64) -> Jet {
        self.scale(k)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        self.scale(Complex64::new(k, 0.0))
    }
}
