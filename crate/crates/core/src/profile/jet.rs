//! Truncated Taylor arithmetic of order 3 in one variable.
//!
//! A [`Jet3`] stores normalized Taylor coefficients `c_i = f^(i)(r0) / i!`.

use std::ops::{Add, Div, Mul, Neg, Sub};

const ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub c: [f64; ORDER],
}

impl Jet3 {
    pub fn constant(v: f64) -> Self {
        Self { c: [v, 0.0, 0.0, 0.0] }
    }

    /// The independent variable at `r`.
    pub fn variable(r: f64) -> Self {
        Self { c: [r, 1.0, 0.0, 0.0] }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `(f, f', f'', f''')`.
    pub fn derivatives(&self) -> [f64; ORDER] {
        [self.c[0], self.c[1], 2.0 * self.c[2], 6.0 * self.c[3]]
    }

    pub fn is_constant(&self) -> bool {
        self.c[1..].iter().all(|&x| x == 0.0)
    }

    pub fn recip(&self) -> Self {
        Self::constant(1.0) / *self
    }

    pub fn exp(&self) -> Self {
        let a = &self.c;
        let mut e = [a[0].exp(), 0.0, 0.0, 0.0];
        for k in 1..ORDER {
            e[k] = (1..=k).map(|j| j as f64 * a[j] * e[k - j]).sum::<f64>() / k as f64;
        }
        Self { c: e }
    }

    /// Natural logarithm; the caller guarantees `value() > 0`.
    pub fn ln(&self) -> Self {
        let a = &self.c;
        let mut l = [a[0].ln(), 0.0, 0.0, 0.0];
        for k in 1..ORDER {
            let s: f64 = (1..k).map(|j| j as f64 * l[j] * a[k - j]).sum();
            l[k] = (a[k] - s / k as f64) / a[0];
        }
        Self { c: l }
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let a = &self.c;
        let mut s = [a[0].sin(), 0.0, 0.0, 0.0];
        let mut c = [a[0].cos(), 0.0, 0.0, 0.0];
        for k in 1..ORDER {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for j in 1..=k {
                ds += j as f64 * a[j] * c[k - j];
                dc -= j as f64 * a[j] * s[k - j];
            }
            s[k] = ds / k as f64;
            c[k] = dc / k as f64;
        }
        (Self { c: s }, Self { c })
    }

    /// Square root; the caller guarantees `value() > 0`.
    pub fn sqrt(&self) -> Self {
        let a = &self.c;
        let mut s = [a[0].sqrt(), 0.0, 0.0, 0.0];
        for k in 1..ORDER {
            let cross: f64 = (1..k).map(|j| s[j] * s[k - j]).sum();
            s[k] = (a[k] - cross) / (2.0 * s[0]);
        }
        Self { c: s }
    }

    /// `self^p` for a constant real exponent; needs `value() > 0`.
    pub fn powf(&self, p: f64) -> Self {
        let a = &self.c;
        let mut y = [a[0].powf(p), 0.0, 0.0, 0.0];
        for k in 1..ORDER {
            let s: f64 = (1..=k).map(|j| ((p + 1.0) * j as f64 - k as f64) * a[j] * y[k - j]).sum();
            y[k] = s / (k as f64 * a[0]);
        }
        Self { c: y }
    }

    /// `self^e` for a non-negative integer exponent, valid for any base.
    pub fn powi(&self, e: u32) -> Self {
        let mut result = Self::constant(1.0);
        let mut base = *self;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            e >>= 1;
        }
        result
    }
}

impl Add for Jet3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { c: std::array::from_fn(|i| self.c[i] + o.c[i]) }
    }
}

impl Sub for Jet3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { c: std::array::from_fn(|i| self.c[i] - o.c[i]) }
    }
}

impl Neg for Jet3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self { c: self.c.map(|x| -x) }
    }
}

impl Mul for Jet3 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self { c: std::array::from_fn(|k| (0..=k).map(|i| self.c[i] * o.c[k - i]).sum()) }
    }
}

impl Div for Jet3 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let mut q = [0.0; ORDER];
        for k in 0..ORDER {
            let s: f64 = (0..k).map(|i| q[i] * o.c[k - i]).sum();
            q[k] = (self.c[k] - s) / o.c[0];
        }
        Self { c: q }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; 4], b: [f64; 4]) {
        for i in 0..4 {
            assert!((a[i] - b[i]).abs() < 1e-12 * (1.0 + b[i].abs()), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let x = Jet3::variable(0.7);
        let (s, c) = x.sin_cos();
        close(s.derivatives(), [0.7f64.sin(), 0.7f64.cos(), -0.7f64.sin(), -0.7f64.cos()]);
        close(c.derivatives(), [0.7f64.cos(), -0.7f64.sin(), -0.7f64.cos(), 0.7f64.sin()]);
        let e = 0.7f64.exp();
        close(x.exp().derivatives(), [e, e, e, e]);
        close(x.ln().derivatives(), [0.7f64.ln(), 1.0 / 0.7, -1.0 / 0.49, 2.0 / 0.343]);
        let r = 0.7f64;
        close(x.sqrt().derivatives(), [r.sqrt(), 0.5 / r.sqrt(), -0.25 * r.powf(-1.5), 0.375 * r.powf(-2.5)]);
        close(x.powf(-3.0).derivatives(), [r.powi(-3), -3.0 * r.powi(-4), 12.0 * r.powi(-5), -60.0 * r.powi(-6)]);
        close(x.powi(3).derivatives(), [r.powi(3), 3.0 * r * r, 6.0 * r, 6.0]);
        close((x / x.exp()).derivatives(), (x * (-x).exp()).derivatives());
    }

    #[test]
    fn integer_power_of_negative_base() {
        let x = Jet3::variable(-2.0);
        close(x.powi(2).derivatives(), [4.0, -4.0, 2.0, 0.0]);
    }
}
