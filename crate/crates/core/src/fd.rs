//! Central-difference jets, used only as an independent oracle.

use crate::error::{Error, Result};
use crate::grid::Box2;
use crate::jet::Jet2;

/// Default step for first and second partials.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Default step for third partials; third-order stencils amplify roundoff.
pub const DEFAULT_STEP_THIRD: f64 = 1e-3;

/// Central-difference jet of `f` at `p` with a single step `h` for all orders.
///
/// The stencil reaches `2h` from `p`; when `domain` is given the whole
/// stencil must lie inside it.
pub fn fd_jet<F>(f: F, p: (f64, f64), h: f64, domain: Option<&Box2>) -> Result<Jet2>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    fd_jet_with(f, p, h, h, domain)
}

/// Like [`fd_jet`] with a separate step for the third-order entries.
pub fn fd_jet_with<F>(f: F, p: (f64, f64), h: f64, h3: f64, domain: Option<&Box2>) -> Result<Jet2>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    if !(h > 0.0 && h3 > 0.0) {
        return Err(Error::Parameter(format!("finite-difference step must be positive (h = {h}, h3 = {h3})")));
    }
    let (x, y) = p;
    if let Some(d) = domain {
        let r = 2.0 * h.max(h3);
        for (sx, sy) in [(x - r, y - r), (x + r, y + r)] {
            if !d.contains(sx, sy) {
                return Err(Error::OutsideDomain {
                    x: sx,
                    y: sy,
                    domain: *d,
                });
            }
        }
    }
    let e = |i: f64, j: f64, s: f64| f(x + i * s, y + j * s);

    let f0 = e(0.0, 0.0, h)?;
    let (fpx, fmx) = (e(1.0, 0.0, h)?, e(-1.0, 0.0, h)?);
    let (fpy, fmy) = (e(0.0, 1.0, h)?, e(0.0, -1.0, h)?);
    let (fpp, fpm, fmp, fmm) = (
        e(1.0, 1.0, h)?,
        e(1.0, -1.0, h)?,
        e(-1.0, 1.0, h)?,
        e(-1.0, -1.0, h)?,
    );

    let h2 = h * h;
    let d10 = (fpx - fmx) / (2.0 * h);
    let d01 = (fpy - fmy) / (2.0 * h);
    let d20 = (fpx - 2.0 * f0 + fmx) / h2;
    let d02 = (fpy - 2.0 * f0 + fmy) / h2;
    let d11 = (fpp - fpm - fmp + fmm) / (4.0 * h2);

    let s = h3;
    let s3 = 2.0 * s * s * s;
    let d30 = (e(2.0, 0.0, s)? - 2.0 * e(1.0, 0.0, s)? + 2.0 * e(-1.0, 0.0, s)? - e(-2.0, 0.0, s)?) / s3;
    let d03 = (e(0.0, 2.0, s)? - 2.0 * e(0.0, 1.0, s)? + 2.0 * e(0.0, -1.0, s)? - e(0.0, -2.0, s)?) / s3;
    // ∂ᵧ of the second x-difference, and its transpose.
    let d21 = (e(1.0, 1.0, s)? - 2.0 * e(0.0, 1.0, s)? + e(-1.0, 1.0, s)?
        - e(1.0, -1.0, s)?
        + 2.0 * e(0.0, -1.0, s)?
        - e(-1.0, -1.0, s)?)
        / s3;
    let d12 = (e(1.0, 1.0, s)? - 2.0 * e(1.0, 0.0, s)? + e(1.0, -1.0, s)?
        - e(-1.0, 1.0, s)?
        + 2.0 * e(-1.0, 0.0, s)?
        - e(-1.0, -1.0, s)?)
        / s3;

    Ok(Jet2 {
        value: f0,
        d10,
        d01,
        d20,
        d11,
        d02,
        d30,
        d21,
        d12,
        d03,
    })
}

/// `|a − b| / max(|a|, 1)`: relative error that degrades to absolute near zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

/// Relative tolerance for AD-vs-FD agreement by derivative order.
pub fn fd_tolerance(order: usize) -> f64 {
    if order <= 2 {
        1e-6
    } else {
        1e-3
    }
}

pub const JET_ENTRY_NAMES: [&str; 10] = ["f", "f_x", "f_y", "f_xx", "f_xy", "f_yy", "f_xxx", "f_xxy", "f_xyy", "f_yyy"];
const JET_ENTRY_ORDERS: [usize; 10] = [0, 1, 1, 2, 2, 2, 3, 3, 3, 3];

/// One entry of an AD-vs-FD comparison.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JetComparison {
    pub name: String,
    pub order: usize,
    pub ad: f64,
    pub fd: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub ok: bool,
}

/// Compares the jet of `field` at `p` with central differences, using `h`
/// for orders 1–2 and `h3` for order 3.
pub fn compare_with_fd(
    field: &dyn crate::field::ScalarField2,
    p: (f64, f64),
    h: f64,
    h3: f64,
) -> Result<Vec<JetComparison>> {
    let ad = field.eval(p.0, p.1)?.to_array();
    let fd = fd_jet_with(|x, y| Ok(field.eval(x, y)?.value), p, h, h3, None)?.to_array();
    Ok((0..10)
        .map(|k| {
            let order = JET_ENTRY_ORDERS[k];
            let e = rel_err(ad[k], fd[k]);
            let tolerance = fd_tolerance(order);
            JetComparison {
                name: JET_ENTRY_NAMES[k].to_string(),
                order,
                ad: ad[k],
                fd: fd[k],
                rel_err: e,
                tolerance,
                ok: e <= tolerance,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_second_derivative() {
        let j = fd_jet(|x, y| Ok(x * x * y), (1.0, 2.0), 1e-4, None).unwrap();
        assert!((j.d20 - 4.0).abs() < 1e-6);
        assert!((j.d11 - 2.0).abs() < 1e-6);
    }

    #[test]
    fn constant_has_no_derivatives() {
        let j = fd_jet(|_, _| Ok(7.0), (0.3, -0.2), 1e-3, None).unwrap();
        assert_eq!(j.value, 7.0);
        assert!(j.to_array()[1..].iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn stencil_must_stay_in_domain() {
        let d = Box2::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            fd_jet(|x, _| Ok(x), (0.0001, 0.5), 1e-4, Some(&d)),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(fd_jet(|x, _| Ok(x), (0.5, 0.5), 1e-4, Some(&d)).is_ok());
        assert!(fd_jet(|x, _| Ok(x), (0.5, 0.5), 0.0, None).is_err());
    }

    #[test]
    fn third_partials_of_cubic() {
        // x²y + y³: d21 = 2, d03 = 6
        let j = fd_jet(|x, y| Ok(x * x * y + y * y * y), (0.4, 0.7), 1e-3, None).unwrap();
        assert!((j.d21 - 2.0).abs() < 1e-6);
        assert!((j.d03 - 6.0).abs() < 1e-6);
        assert!(j.d30.abs() < 1e-6);
        assert!(j.d12.abs() < 1e-6);
    }
}
