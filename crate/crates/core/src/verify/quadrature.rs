//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

/// Kronrod estimate and `|K − G|` on `[a, b]`.
fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    if !k.is_finite() {
        return Err(Error::QuadratureFailure(format!("non-finite integrand on [{a}, {b}]")));
    }
    Ok((k * h, ((k - g) * h).abs()))
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// `∫_a^b f` to absolute tolerance `tol`; reversed bounds give the negated integral.
///
/// Globally adaptive: the subinterval with the largest error estimate is
/// bisected until the summed estimate meets `tol`.
pub fn integrate<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(tol > 0.0) {
        return Err(Error::QuadratureFailure(format!("tolerance {tol} must be positive")));
    }
    let (value, err) = gk15(&mut f, a, b)?;
    let mut pieces = vec![Piece { a, b, value, err }];
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.err).sum();
        let total: f64 = pieces.iter().map(|p| p.value).sum();
        let roundoff = 64.0 * f64::EPSILON * pieces.iter().map(|p| p.value.abs()).sum::<f64>();
        if total_err <= tol.max(roundoff) {
            return Ok(total);
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureFailure(format!(
                "no convergence on [{a}, {b}] after {MAX_INTERVALS} subintervals (error estimate {total_err:e})"
            )));
        }
        let (i, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("non-empty");
        let p = pieces.swap_remove(i);
        let m = 0.5 * (p.a + p.b);
        if m == p.a || m == p.b {
            return Err(Error::QuadratureFailure(format!("interval [{}, {}] cannot be split further", p.a, p.b)));
        }
        let (v1, e1) = gk15(&mut f, p.a, m)?;
        let (v2, e2) = gk15(&mut f, m, p.b)?;
        pieces.push(Piece { a: p.a, b: m, value: v1, err: e1 });
        pieces.push(Piece { a: m, b: p.b, value: v2, err: e2 });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_transcendentals() {
        let v = integrate(|x| Ok(x * x), 0.0, 3.0, 1e-14).unwrap();
        assert!((v - 9.0).abs() < 1e-13);
        let v = integrate(|x| Ok(x.sin()), 0.0, std::f64::consts::PI, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = integrate(|x| Ok(x.sqrt()), 1.0, 0.0, 1e-12).unwrap();
        assert!((v + 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn errors_propagate() {
        let e = integrate(|_| Err(Error::QuadratureFailure("x".into())), 0.0, 1.0, 1e-8);
        assert!(e.is_err());
    }
}
