//! Forward-mode jets over three chart directions.
//!
//! Every geometric quantity in this crate is built from scalar arithmetic, so
//! differentiating a map up to second order reduces to running the same code
//! over a scalar type that carries derivative payloads. [`Jet1`] carries a
//! value and a gradient with respect to three chart coordinates; [`Jet2`]
//! additionally carries the symmetric Hessian. Both propagate derivatives by
//! the exact chain rule; finite differences appear in this crate only as
//! cross-check oracles.

/// Scalar abstraction: plain `f64` or a jet carrying derivative payloads.
///
/// The single nontrivial requirement is [`Real::lift_c2`], which composes a
/// twice-differentiable scalar function given its value and first two
/// derivatives at the point. All elementary functions route through it.
pub trait Real:
    Copy
    + std::fmt::Debug
    + PartialEq
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;

    /// The value component, discarding any derivative payload.
    fn value(&self) -> f64;

    /// Compose with a C^2 scalar function; `f` returns (f, f', f'') at the
    /// value point. The chain rule is applied to the payload exactly.
    fn lift_c2(self, f: fn(f64) -> (f64, f64, f64)) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn sqrt(self) -> Self {
        self.lift_c2(|x| {
            let s = x.sqrt();
            (s, 0.5 / s, -0.25 / (s * x))
        })
    }

    fn sin(self) -> Self {
        self.lift_c2(|x| (x.sin(), x.cos(), -x.sin()))
    }

    fn cos(self) -> Self {
        self.lift_c2(|x| (x.cos(), -x.sin(), -x.cos()))
    }

    fn recip(self) -> Self {
        self.lift_c2(|x| {
            let r = 1.0 / x;
            (r, -r * r, 2.0 * r * r * r)
        })
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn value(&self) -> f64 {
        *self
    }

    fn lift_c2(self, f: fn(f64) -> (f64, f64, f64)) -> Self {
        f(self).0
    }
}

/// First-order jet: value plus gradient along the three chart directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet1 {
    pub v: f64,
    pub g: [f64; 3],
}

impl Jet1 {
    pub fn constant(v: f64) -> Self {
        Jet1 { v, g: [0.0; 3] }
    }

    /// Seed for the chart coordinate along `axis`.
    pub fn variable(v: f64, axis: usize) -> Self {
        let mut g = [0.0; 3];
        g[axis] = 1.0;
        Jet1 { v, g }
    }
}

impl std::ops::Add for Jet1 {
    type Output = Jet1;
    fn add(self, o: Jet1) -> Jet1 {
        Jet1 {
            v: self.v + o.v,
            g: [self.g[0] + o.g[0], self.g[1] + o.g[1], self.g[2] + o.g[2]],
        }
    }
}

impl std::ops::Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, o: Jet1) -> Jet1 {
        Jet1 {
            v: self.v - o.v,
            g: [self.g[0] - o.g[0], self.g[1] - o.g[1], self.g[2] - o.g[2]],
        }
    }
}

impl std::ops::Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        Jet1 {
            v: -self.v,
            g: [-self.g[0], -self.g[1], -self.g[2]],
        }
    }
}

impl std::ops::Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, o: Jet1) -> Jet1 {
        let mut g = [0.0; 3];
        for i in 0..3 {
            g[i] = self.g[i] * o.v + self.v * o.g[i];
        }
        Jet1 { v: self.v * o.v, g }
    }
}

impl std::ops::Div for Jet1 {
    type Output = Jet1;
    fn div(self, o: Jet1) -> Jet1 {
        self * o.recip()
    }
}

impl Real for Jet1 {
    fn from_f64(x: f64) -> Self {
        Jet1::constant(x)
    }

    fn value(&self) -> f64 {
        self.v
    }

    fn lift_c2(self, f: fn(f64) -> (f64, f64, f64)) -> Self {
        let (f0, f1, _) = f(self.v);
        Jet1 {
            v: f0,
            g: [f1 * self.g[0], f1 * self.g[1], f1 * self.g[2]],
        }
    }
}

/// Second-order jet: value, gradient, and symmetric Hessian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 {
            v,
            g: [0.0; 3],
            h: [[0.0; 3]; 3],
        }
    }

    /// Seed for the chart coordinate along `axis`.
    pub fn variable(v: f64, axis: usize) -> Self {
        let mut g = [0.0; 3];
        g[axis] = 1.0;
        Jet2 {
            v,
            g,
            h: [[0.0; 3]; 3],
        }
    }

    /// Forget the Hessian.
    pub fn jet1(&self) -> Jet1 {
        Jet1 {
            v: self.v,
            g: self.g,
        }
    }

    /// The first-order jet of the derivative along `axis`: its value is the
    /// gradient component and its gradient is the Hessian row.
    pub fn derivative_jet(&self, axis: usize) -> Jet1 {
        Jet1 {
            v: self.g[axis],
            g: self.h[axis],
        }
    }
}

impl std::ops::Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.v + o.v);
        for i in 0..3 {
            out.g[i] = self.g[i] + o.g[i];
            for j in 0..3 {
                out.h[i][j] = self.h[i][j] + o.h[i][j];
            }
        }
        out
    }
}

impl std::ops::Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.v - o.v);
        for i in 0..3 {
            out.g[i] = self.g[i] - o.g[i];
            for j in 0..3 {
                out.h[i][j] = self.h[i][j] - o.h[i][j];
            }
        }
        out
    }
}

impl std::ops::Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2::constant(0.0) - self
    }
}

impl std::ops::Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.v * o.v);
        for i in 0..3 {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
        }
        for i in 0..3 {
            for j in 0..3 {
                out.h[i][j] = self.h[i][j] * o.v
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i]
                    + self.v * o.h[i][j];
            }
        }
        out
    }
}

impl std::ops::Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Real for Jet2 {
    fn from_f64(x: f64) -> Self {
        Jet2::constant(x)
    }

    fn value(&self) -> f64 {
        self.v
    }

    fn lift_c2(self, f: fn(f64) -> (f64, f64, f64)) -> Self {
        let (f0, f1, f2) = f(self.v);
        let mut out = Jet2::constant(f0);
        for i in 0..3 {
            out.g[i] = f1 * self.g[i];
            for j in 0..3 {
                out.h[i][j] = f2 * self.g[i] * self.g[j] + f1 * self.h[i][j];
            }
        }
        out
    }
}
