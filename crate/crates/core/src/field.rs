//! Scalar fields on the base `(x, y)`, evaluated to jets.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{Jet2, JetError};
use crate::profile::Profile1;

/// A smooth scalar function of the base coordinates.
///
/// Evaluation must be pure: the same point always yields the same jet.
pub trait ScalarField2: Send + Sync {
    fn eval(&self, x: f64, y: f64) -> Result<Jet2>;

    fn value(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.eval(x, y)?.value)
    }
}

pub type Field = Arc<dyn ScalarField2>;

impl<F: ScalarField2 + ?Sized> ScalarField2 for Arc<F> {
    fn eval(&self, x: f64, y: f64) -> Result<Jet2> {
        (**self).eval(x, y)
    }
}

impl<F: ScalarField2 + ?Sized> ScalarField2 for &F {
    fn eval(&self, x: f64, y: f64) -> Result<Jet2> {
        (**self).eval(x, y)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl ScalarField2 for Constant {
    fn eval(&self, _x: f64, _y: f64) -> Result<Jet2> {
        Ok(Jet2::constant(self.0))
    }
}

/// Field defined by a closure over the coordinate jets.
pub struct JetFn<F>(pub F);

impl<F> ScalarField2 for JetFn<F>
where
    F: Fn(Jet2, Jet2) -> Result<Jet2, JetError> + Send + Sync,
{
    fn eval(&self, x: f64, y: f64) -> Result<Jet2> {
        (self.0)(Jet2::var_x(x), Jet2::var_y(y)).map_err(Error::domain(x, y))
    }
}

impl<F> fmt::Debug for JetFn<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("JetFn")
    }
}

pub fn from_jet_fn<F>(f: F) -> Field
where
    F: Fn(Jet2, Jet2) -> Result<Jet2, JetError> + Send + Sync + 'static,
{
    Arc::new(JetFn(f))
}

pub fn constant(c: f64) -> Field {
    Arc::new(Constant(c))
}

/// Which base coordinate a univariate profile depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

/// A univariate profile lifted to a field constant in the other coordinate.
#[derive(Clone)]
pub struct ProfileField {
    pub profile: Arc<dyn Profile1>,
    pub axis: Axis,
}

impl ScalarField2 for ProfileField {
    fn eval(&self, x: f64, y: f64) -> Result<Jet2> {
        let t = match self.axis {
            Axis::X => Jet2::var_x(x),
            Axis::Y => Jet2::var_y(y),
        };
        self.profile.eval_jet(&t).map_err(Error::domain(x, y))
    }
}

/// Pointwise combination of fields.
pub struct Combine {
    parts: Vec<Field>,
    op: Box<dyn Fn(&[Jet2]) -> Result<Jet2, JetError> + Send + Sync>,
}

impl Combine {
    pub fn new<F>(parts: Vec<Field>, op: F) -> Self
    where
        F: Fn(&[Jet2]) -> Result<Jet2, JetError> + Send + Sync + 'static,
    {
        Combine {
            parts,
            op: Box::new(op),
        }
    }
}

impl ScalarField2 for Combine {
    fn eval(&self, x: f64, y: f64) -> Result<Jet2> {
        let vals = self
            .parts
            .iter()
            .map(|f| f.eval(x, y))
            .collect::<Result<Vec<_>>>()?;
        (self.op)(&vals).map_err(Error::domain(x, y))
    }
}

pub fn combine<F>(parts: Vec<Field>, op: F) -> Field
where
    F: Fn(&[Jet2]) -> Result<Jet2, JetError> + Send + Sync + 'static,
{
    Arc::new(Combine::new(parts, op))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_field_is_exact() {
        let f = from_jet_fn(|x, y| Ok(x * x * y));
        let j = f.eval(1.0, 2.0).unwrap();
        assert_eq!(j.value, 2.0);
        assert_eq!(j.d20, 4.0);
        assert_eq!(j.d21, 2.0);
    }

    #[test]
    fn combine_sums() {
        let f = combine(vec![constant(2.0), from_jet_fn(|x, _| Ok(x))], |v| {
            Ok(v[0] + v[1])
        });
        assert_eq!(f.eval(3.0, 0.0).unwrap(), Jet2::var_x(5.0));
    }
}
