//! Truncated bivariate Taylor polynomials ("jets") up to total degree 3.
//!
//! A jet stores the Taylor coefficients of a function of `(x, y)` around a
//! base point, `c[(i, j)] = ∂ˣⁱ∂ʸʲ f / (i! j!)`. Arithmetic on jets is
//! forward-mode automatic differentiation: evaluating a coefficient callback
//! on coordinate jets yields the value together with all partial derivatives
//! up to the jet order. Curvature needs second derivatives of a metric built
//! from first derivatives of the vector potential, so degree 3 is enough.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest supported total degree.
pub const MAX_ORDER: u8 = 3;

const NCOEF: [usize; 4] = [1, 3, 6, 10];

#[inline]
const fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

// (i, j) exponent pairs in storage order.
const EXPONENTS: [(usize, usize); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; 10],
    order: u8,
}

impl Jet {
    pub fn constant(value: f64, order: u8) -> Self {
        let mut c = [0.0; 10];
        c[0] = value;
        Jet { c, order: order.min(MAX_ORDER) }
    }

    /// Coordinate jet `x` at `x0`.
    pub fn var_x(x0: f64, order: u8) -> Self {
        let mut j = Jet::constant(x0, order);
        if j.order >= 1 {
            j.c[idx(1, 0)] = 1.0;
        }
        j
    }

    /// Coordinate jet `y` at `y0`.
    pub fn var_y(y0: f64, order: u8) -> Self {
        let mut j = Jet::constant(y0, order);
        if j.order >= 1 {
            j.c[idx(0, 1)] = 1.0;
        }
        j
    }

    /// Both coordinate jets at a point.
    pub fn coords(x0: f64, y0: f64, order: u8) -> (Jet, Jet) {
        (Jet::var_x(x0, order), Jet::var_y(y0, order))
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient of `xⁱ yʲ`.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.order as usize {
            0.0
        } else {
            self.c[idx(i, j)]
        }
    }

    /// Partial derivative `∂ˣⁱ∂ʸʲ f` at the base point.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        self.coeff(i, j) * factorial(i) * factorial(j)
    }

    pub fn dx(&self) -> f64 {
        self.partial(1, 0)
    }
    pub fn dy(&self) -> f64 {
        self.partial(0, 1)
    }
    pub fn dxx(&self) -> f64 {
        self.partial(2, 0)
    }
    pub fn dxy(&self) -> f64 {
        self.partial(1, 1)
    }
    pub fn dyy(&self) -> f64 {
        self.partial(0, 2)
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.dx(), self.dy()]
    }

    pub fn hessian(&self) -> [[f64; 2]; 2] {
        [[self.dxx(), self.dxy()], [self.dxy(), self.dyy()]]
    }

    /// Jet of `∂f/∂x`, one order lower.
    pub fn d_dx(&self) -> Jet {
        let order = self.order.saturating_sub(1);
        let mut out = Jet::constant(0.0, order);
        for (k, &(i, j)) in EXPONENTS.iter().enumerate().take(NCOEF[order as usize]) {
            out.c[k] = (i + 1) as f64 * self.c[idx(i + 1, j)];
        }
        if self.order == 0 {
            out.c[0] = 0.0;
        }
        out
    }

    /// Jet of `∂f/∂y`, one order lower.
    pub fn d_dy(&self) -> Jet {
        let order = self.order.saturating_sub(1);
        let mut out = Jet::constant(0.0, order);
        for (k, &(i, j)) in EXPONENTS.iter().enumerate().take(NCOEF[order as usize]) {
            out.c[k] = (j + 1) as f64 * self.c[idx(i, j + 1)];
        }
        if self.order == 0 {
            out.c[0] = 0.0;
        }
        out
    }

    /// Drops terms above `order`.
    pub fn truncate(mut self, order: u8) -> Jet {
        if order < self.order {
            for k in NCOEF[order as usize]..10 {
                self.c[k] = 0.0;
            }
            self.order = order;
        }
        self
    }

    fn n(&self) -> usize {
        NCOEF[self.order as usize]
    }

    /// `g(f)` for a univariate `g` given `[g, g', g'', g''']` at `f(0)`.
    pub fn compose(&self, derivs: [f64; 4]) -> Jet {
        let mut d = *self;
        d.c[0] = 0.0;
        let mut out = Jet::constant(derivs[0], self.order);
        let mut power = Jet::constant(1.0, self.order);
        let mut fact = 1.0;
        for (k, &dk) in derivs.iter().enumerate().skip(1).take(self.order as usize) {
            power = power * d;
            fact *= k as f64;
            let s = dk / fact;
            for m in 0..self.n() {
                out.c[m] += s * power.c[m];
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let a = self.c[0];
        let r = 1.0 / a;
        self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn powf(&self, p: f64) -> Jet {
        let a = self.c[0];
        let v = a.powf(p);
        self.compose([
            v,
            p * a.powf(p - 1.0),
            p * (p - 1.0) * a.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * a.powf(p - 3.0),
        ])
    }

    pub fn powi(&self, n: i32) -> Jet {
        let mut out = Jet::constant(1.0, self.order);
        for _ in 0..n.unsigned_abs() {
            out = out * *self;
        }
        if n < 0 {
            out.recip()
        } else {
            out
        }
    }

    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(&self) -> Jet {
        let a = self.c[0];
        self.compose([a.ln(), 1.0 / a, -1.0 / (a * a), 2.0 / (a * a * a)])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        self.compose([c, -s, -c, s])
    }

    /// `|f|`, differentiated on the side of the base value.
    pub fn abs(&self) -> Jet {
        if self.c[0] < 0.0 {
            -*self
        } else {
            *self
        }
    }

    pub fn scale(mut self, s: f64) -> Jet {
        for k in 0..self.n() {
            self.c[k] *= s;
        }
        self
    }
}

fn factorial(n: usize) -> f64 {
    match n {
        0 | 1 => 1.0,
        2 => 2.0,
        3 => 6.0,
        _ => (1..=n).map(|k| k as f64).product(),
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut out = Jet::constant(0.0, order);
        for k in 0..out.n() {
            out.c[k] = self.c[k] + rhs.c[k];
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut out = Jet::constant(0.0, order);
        for k in 0..out.n() {
            out.c[k] = self.c[k] - rhs.c[k];
        }
        out
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order) as usize;
        let mut out = Jet::constant(0.0, order as u8);
        let n = NCOEF[order];
        for a in 0..n {
            let (ia, ja) = EXPONENTS[a];
            let ca = self.c[a];
            if ca == 0.0 {
                continue;
            }
            for b in 0..n {
                let (ib, jb) = EXPONENTS[b];
                if ia + ja + ib + jb > order {
                    continue;
                }
                out.c[idx(ia + ib, ja + jb)] += ca * rhs.c[b];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        rhs.recip().scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_partials_are_exact() {
        let (x, y) = Jet::coords(0.3, -0.7, 3);
        // f = x^2 y + 3 x y^3
        let f = x * x * y + 3.0 * x * y * y * y;
        assert_relative_eq!(f.value(), 0.09 * -0.7 + 0.9 * -0.343, epsilon = 1e-15);
        assert_relative_eq!(f.dx(), 2.0 * 0.3 * -0.7 + 3.0 * -0.343, epsilon = 1e-14);
        assert_relative_eq!(f.dy(), 0.09 + 9.0 * 0.3 * 0.49, epsilon = 1e-14);
        assert_relative_eq!(f.dxx(), 2.0 * -0.7, epsilon = 1e-14);
        assert_relative_eq!(f.dxy(), 0.6 + 9.0 * 0.49, epsilon = 1e-14);
        assert_relative_eq!(f.dyy(), 18.0 * 0.3 * -0.7, epsilon = 1e-14);
        assert_relative_eq!(f.partial(2, 1), 2.0, epsilon = 1e-14);
        assert_relative_eq!(f.partial(1, 2), 18.0 * -0.7, epsilon = 1e-14);
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let (x, y) = Jet::coords(0.4, 0.2, 3);
        let r2 = x * x + y * y;
        let f = (1.0 + r2).recip();
        let d = 1.0 + 0.2;
        assert_relative_eq!(f.value(), 1.0 / d, epsilon = 1e-15);
        assert_relative_eq!(f.dx(), -2.0 * 0.4 / (d * d), epsilon = 1e-14);
        // ∂xx (1+r²)^-1 = -2/(1+r²)² + 8x²/(1+r²)³
        assert_relative_eq!(f.dxx(), -2.0 / (d * d) + 8.0 * 0.16 / (d * d * d), epsilon = 1e-13);

        let e = (x * y).exp();
        assert_relative_eq!(e.dxy(), (0.08f64).exp() * (1.0 + 0.08), epsilon = 1e-14);
        let s = r2.sqrt();
        assert_relative_eq!(s.dx(), 0.4 / 0.2f64.sqrt(), epsilon = 1e-14);
        let l = r2.ln();
        assert_relative_eq!(l.dy(), 2.0 * 0.2 / 0.2, epsilon = 1e-14);
    }

    #[test]
    fn derivative_jets_lower_the_order() {
        let (x, y) = Jet::coords(1.0, 2.0, 3);
        let f = x * x * x * y;
        let fx = f.d_dx();
        assert_eq!(fx.order(), 2);
        assert_relative_eq!(fx.value(), 3.0 * 2.0, epsilon = 1e-14);
        assert_relative_eq!(fx.dx(), 6.0 * 2.0, epsilon = 1e-14);
        assert_relative_eq!(fx.dy(), 3.0, epsilon = 1e-14);
        assert_relative_eq!(fx.dxy(), 6.0, epsilon = 1e-14);
        let fy = f.d_dy();
        assert_relative_eq!(fy.dxx(), 6.0, epsilon = 1e-14);
    }

    #[test]
    fn mixed_order_arithmetic_truncates() {
        let a = Jet::var_x(1.0, 3);
        let b = Jet::var_x(1.0, 1);
        let p = a * a * b;
        assert_eq!(p.order(), 1);
        assert_relative_eq!(p.dx(), 3.0, epsilon = 1e-15);
        assert_eq!(p.dxx(), 0.0);
    }
}
