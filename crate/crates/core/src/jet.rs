//! Third-order bivariate Taylor jets.
//!
//! A [`Jet2`] carries the value of a scalar quantity at a base point together
//! with every partial derivative in `(x, y)` through order three. Arithmetic
//! on jets propagates derivatives exactly (Leibniz and Faà di Bruno rules), so
//! composing jets of the coordinate functions yields exact derivatives of any
//! closed-form expression.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Failure of a jet operation whose argument left the domain of the function.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("{func}: argument {value} outside domain")]
    Domain { func: &'static str, value: f64 },
    #[error("division by a jet with zero value")]
    DivisionByZero,
    #[error("{func}: non-finite result from argument {value}")]
    NonFinite { func: &'static str, value: f64 },
}

/// Value and partial derivatives through order three of a scalar in `(x, y)`.
///
/// Mixed partials are stored once; `d21` is `∂ₓ²∂ᵧ`, `d12` is `∂ₓ∂ᵧ²`.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Jet2 {
    pub value: f64,
    pub d10: f64,
    pub d01: f64,
    pub d20: f64,
    pub d11: f64,
    pub d02: f64,
    pub d30: f64,
    pub d21: f64,
    pub d12: f64,
    pub d03: f64,
}

/// Binary jet operations, exposed for table-driven callers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Univariate analytic functions that jets can be composed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    /// `[f, f', f'', f''']` at `u`, or a domain error.
    pub fn derivatives(self, u: f64) -> Result<[f64; 4], JetError> {
        let domain = |ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(JetError::Domain {
                    func: self.name(),
                    value: u,
                })
            }
        };
        let d = match self {
            Func::Sin => {
                let (s, c) = u.sin_cos();
                [s, c, -s, -c]
            }
            Func::Cos => {
                let (s, c) = u.sin_cos();
                [c, -s, -c, s]
            }
            Func::Tan => {
                domain(u.cos() != 0.0)?;
                let t = u.tan();
                let sec2 = 1.0 + t * t;
                [t, sec2, 2.0 * t * sec2, 2.0 * sec2 * (1.0 + 3.0 * t * t)]
            }
            Func::Sinh => {
                let (s, c) = (u.sinh(), u.cosh());
                [s, c, s, c]
            }
            Func::Cosh => {
                let (s, c) = (u.sinh(), u.cosh());
                [c, s, c, s]
            }
            Func::Tanh => {
                let t = u.tanh();
                let sech2 = 1.0 - t * t;
                [t, sech2, -2.0 * t * sech2, 2.0 * sech2 * (3.0 * t * t - 1.0)]
            }
            Func::Exp => {
                let e = u.exp();
                [e; 4]
            }
            Func::Log => {
                domain(u > 0.0)?;
                let r = 1.0 / u;
                [u.ln(), r, -r * r, 2.0 * r * r * r]
            }
            Func::Sqrt => {
                domain(u > 0.0)?;
                let s = u.sqrt();
                [s, 0.5 / s, -0.25 / (s * u), 0.375 / (s * u * u)]
            }
            Func::Abs => {
                domain(u != 0.0)?;
                [u.abs(), u.signum(), 0.0, 0.0]
            }
        };
        check_finite(self.name(), u, d)
    }
}

fn check_finite(func: &'static str, u: f64, d: [f64; 4]) -> Result<[f64; 4], JetError> {
    if d.iter().all(|v| v.is_finite()) {
        Ok(d)
    } else {
        Err(JetError::NonFinite { func, value: u })
    }
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 {
        value: 0.0,
        d10: 0.0,
        d01: 0.0,
        d20: 0.0,
        d11: 0.0,
        d02: 0.0,
        d30: 0.0,
        d21: 0.0,
        d12: 0.0,
        d03: 0.0,
    };

    pub fn constant(value: f64) -> Self {
        Jet2 {
            value,
            ..Jet2::ZERO
        }
    }

    /// Jet of the coordinate function `x` at abscissa `x`.
    pub fn var_x(x: f64) -> Self {
        Jet2 {
            value: x,
            d10: 1.0,
            ..Jet2::ZERO
        }
    }

    /// Jet of the coordinate function `y` at ordinate `y`.
    pub fn var_y(y: f64) -> Self {
        Jet2 {
            value: y,
            d01: 1.0,
            ..Jet2::ZERO
        }
    }

    /// Builds a jet from its ten entries in storage order.
    pub fn from_array(a: [f64; 10]) -> Self {
        Jet2 {
            value: a[0],
            d10: a[1],
            d01: a[2],
            d20: a[3],
            d11: a[4],
            d02: a[5],
            d30: a[6],
            d21: a[7],
            d12: a[8],
            d03: a[9],
        }
    }

    pub fn to_array(&self) -> [f64; 10] {
        [
            self.value, self.d10, self.d01, self.d20, self.d11, self.d02, self.d30, self.d21,
            self.d12, self.d03,
        ]
    }

    /// Labels of the ten entries, in `to_array` order.
    pub const LABELS: [&'static str; 10] = [
        "value", "d10", "d01", "d20", "d11", "d02", "d30", "d21", "d12", "d03",
    ];

    /// Total derivative order of each entry, in `to_array` order.
    pub const ORDERS: [usize; 10] = [0, 1, 1, 2, 2, 2, 3, 3, 3, 3];

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, s: f64) -> Self {
        Jet2::from_array(self.to_array().map(|v| v * s))
    }

    /// Gradient `(∂ₓ, ∂ᵧ)`.
    pub fn grad(&self) -> [f64; 2] {
        [self.d10, self.d01]
    }

    /// Hessian entries indexed by coordinate (0 = x, 1 = y).
    pub fn hessian(&self) -> [[f64; 2]; 2] {
        [[self.d20, self.d11], [self.d11, self.d02]]
    }

    /// Derivative jet `∂ₓJ`; its third-order entries are unknown and set to zero.
    pub fn shift_x(&self) -> Self {
        Jet2 {
            value: self.d10,
            d10: self.d20,
            d01: self.d11,
            d20: self.d30,
            d11: self.d21,
            d02: self.d12,
            ..Jet2::ZERO
        }
    }

    /// Derivative jet `∂ᵧJ`; its third-order entries are unknown and set to zero.
    pub fn shift_y(&self) -> Self {
        Jet2 {
            value: self.d01,
            d10: self.d11,
            d01: self.d02,
            d20: self.d21,
            d11: self.d12,
            d02: self.d03,
            ..Jet2::ZERO
        }
    }

    /// Composes a univariate function, given `[f, f', f'', f''']` at `self.value`.
    pub fn chain(&self, f: [f64; 4]) -> Self {
        let u = self;
        let [f0, f1, f2, f3] = f;
        let (ux, uy) = (u.d10, u.d01);
        Jet2 {
            value: f0,
            d10: f1 * ux,
            d01: f1 * uy,
            d20: f2 * ux * ux + f1 * u.d20,
            d11: f2 * ux * uy + f1 * u.d11,
            d02: f2 * uy * uy + f1 * u.d02,
            d30: f3 * ux * ux * ux + 3.0 * f2 * ux * u.d20 + f1 * u.d30,
            d21: f3 * ux * ux * uy + f2 * (u.d20 * uy + 2.0 * ux * u.d11) + f1 * u.d21,
            d12: f3 * ux * uy * uy + f2 * (u.d02 * ux + 2.0 * uy * u.d11) + f1 * u.d12,
            d03: f3 * uy * uy * uy + 3.0 * f2 * uy * u.d02 + f1 * u.d03,
        }
    }

    pub fn apply(&self, func: Func) -> Result<Self, JetError> {
        Ok(self.chain(func.derivatives(self.value)?))
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        let u = self.value;
        if u == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let r = 1.0 / u;
        let d = check_finite("recip", u, [r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])?;
        Ok(self.chain(d))
    }

    pub fn checked_div(&self, other: &Jet2) -> Result<Self, JetError> {
        Ok(*self * other.recip()?)
    }

    /// Integer power; valid for any base when `n >= 0`.
    pub fn powi(&self, n: i32) -> Result<Self, JetError> {
        let u = self.value;
        if n < 0 && u == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let nf = n as f64;
        // u^(n-k) is only multiplied by a vanishing falling factorial when n-k < 0 <= n.
        let p = |k: i32| if n - k < 0 && u == 0.0 { 0.0 } else { u.powi(n - k) };
        let d = [
            u.powi(n),
            nf * p(1),
            nf * (nf - 1.0) * p(2),
            nf * (nf - 1.0) * (nf - 2.0) * p(3),
        ];
        Ok(self.chain(check_finite("pow", u, d)?))
    }

    /// Real power with a constant exponent. Integer exponents defer to
    /// [`Jet2::powi`]; any other exponent requires a positive base.
    pub fn powf(&self, e: f64) -> Result<Self, JetError> {
        if e.fract() == 0.0 && e.abs() <= i32::MAX as f64 {
            return self.powi(e as i32);
        }
        let u = self.value;
        if u <= 0.0 {
            return Err(JetError::Domain {
                func: "pow",
                value: u,
            });
        }
        let d = [
            u.powf(e),
            e * u.powf(e - 1.0),
            e * (e - 1.0) * u.powf(e - 2.0),
            e * (e - 1.0) * (e - 2.0) * u.powf(e - 3.0),
        ];
        Ok(self.chain(check_finite("pow", u, d)?))
    }

    /// General power `self^exponent`. A constant exponent goes through
    /// [`Jet2::powf`]; otherwise `exp(exponent * log(self))`.
    pub fn pow(&self, exponent: &Jet2) -> Result<Self, JetError> {
        if exponent.is_constant() {
            return self.powf(exponent.value);
        }
        (*exponent * self.apply(Func::Log)?).apply(Func::Exp)
    }

    /// True when every derivative entry is zero.
    pub fn is_constant(&self) -> bool {
        self.to_array()[1..].iter().all(|&v| v == 0.0)
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Jet2) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Applies a binary operation; division fails on a zero-valued divisor.
pub fn jet_binary(op: BinaryOp, a: &Jet2, b: &Jet2) -> Result<Jet2, JetError> {
    match op {
        BinaryOp::Add => Ok(*a + *b),
        BinaryOp::Sub => Ok(*a - *b),
        BinaryOp::Mul => Ok(*a * *b),
        BinaryOp::Div => a.checked_div(b),
    }
}

/// Composes `func` with a jet.
pub fn jet_compose(func: Func, a: &Jet2) -> Result<Jet2, JetError> {
    a.apply(func)
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, b: Jet2) -> Jet2 {
        let (a, b) = (self.to_array(), b.to_array());
        Jet2::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, b: Jet2) -> Jet2 {
        let (a, b) = (self.to_array(), b.to_array());
        Jet2::from_array(std::array::from_fn(|i| a[i] - b[i]))
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2::from_array(self.to_array().map(|v| -v))
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, b: Jet2) -> Jet2 {
        let a = self;
        Jet2 {
            value: a.value * b.value,
            d10: a.d10 * b.value + a.value * b.d10,
            d01: a.d01 * b.value + a.value * b.d01,
            d20: a.d20 * b.value + 2.0 * a.d10 * b.d10 + a.value * b.d20,
            d11: a.d11 * b.value + a.d10 * b.d01 + a.d01 * b.d10 + a.value * b.d11,
            d02: a.d02 * b.value + 2.0 * a.d01 * b.d01 + a.value * b.d02,
            d30: a.d30 * b.value
                + 3.0 * a.d20 * b.d10
                + 3.0 * a.d10 * b.d20
                + a.value * b.d30,
            d21: a.d21 * b.value
                + a.d20 * b.d01
                + 2.0 * a.d11 * b.d10
                + 2.0 * a.d10 * b.d11
                + a.d01 * b.d20
                + a.value * b.d21,
            d12: a.d12 * b.value
                + a.d02 * b.d10
                + 2.0 * a.d11 * b.d01
                + 2.0 * a.d01 * b.d11
                + a.d10 * b.d02
                + a.value * b.d12,
            d03: a.d03 * b.value
                + 3.0 * a.d02 * b.d01
                + 3.0 * a.d01 * b.d02
                + a.value * b.d03,
        }
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, c: f64) -> Jet2 {
        self.value += c;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(mut self, c: f64) -> Jet2 {
        self.value -= c;
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        self.scale(c)
    }
}

impl fmt::Display for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet2(")?;
        for (i, (label, v)) in Jet2::LABELS.iter().zip(self.to_array()).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{label}={v}")?;
        }
        write!(f, ")")
    }
}
