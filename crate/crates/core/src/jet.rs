//! Truncated Taylor arithmetic of order 4.
//!
//! Used to evaluate the bump function and its derivatives exactly (up to
//! rounding) instead of stacking finite differences, which lose most digits
//! by order 4.

/// Value and derivatives 1..=4 of a scalar function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet4 {
    pub d: [f64; 5],
}

const BINOM: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

impl Jet4 {
    pub fn constant(c: f64) -> Jet4 {
        Jet4 { d: [c, 0.0, 0.0, 0.0, 0.0] }
    }

    /// The identity function at `x`.
    pub fn variable(x: f64) -> Jet4 {
        Jet4 { d: [x, 1.0, 0.0, 0.0, 0.0] }
    }

    pub fn value(&self) -> f64 {
        self.d[0]
    }

    pub fn derivative(&self, k: usize) -> f64 {
        self.d[k]
    }

    pub fn neg(&self) -> Jet4 {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x = -*x;
        }
        Jet4 { d }
    }

    pub fn add(&self, o: &Jet4) -> Jet4 {
        let mut d = self.d;
        for k in 0..5 {
            d[k] += o.d[k];
        }
        Jet4 { d }
    }

    pub fn sub(&self, o: &Jet4) -> Jet4 {
        self.add(&o.neg())
    }

    /// Leibniz product.
    pub fn mul(&self, o: &Jet4) -> Jet4 {
        let mut d = [0.0; 5];
        for k in 0..5 {
            for i in 0..=k {
                d[k] += BINOM[k][i] * self.d[i] * o.d[k - i];
            }
        }
        Jet4 { d }
    }

    /// Reciprocal, solving `self * r = 1` order by order.
    pub fn recip(&self) -> Jet4 {
        let a0 = self.d[0];
        let mut r = [0.0; 5];
        r[0] = 1.0 / a0;
        for k in 1..5 {
            let mut acc = 0.0;
            for i in 1..=k {
                acc += BINOM[k][i] * self.d[i] * r[k - i];
            }
            r[k] = -acc / a0;
        }
        Jet4 { d: r }
    }

    pub fn div(&self, o: &Jet4) -> Jet4 {
        self.mul(&o.recip())
    }

    /// Exponential via `(exp a)^(k) = sum binom(k-1, j) a^(j+1) (exp a)^(k-1-j)`.
    pub fn exp(&self) -> Jet4 {
        let mut e = [0.0; 5];
        e[0] = self.d[0].exp();
        for k in 1..5 {
            let mut acc = 0.0;
            for j in 0..k {
                acc += BINOM[k - 1][j] * self.d[j + 1] * e[k - 1 - j];
            }
            e[k] = acc;
        }
        Jet4 { d: e }
    }
}
