use nalgebra::Matrix2;
use num_complex::Complex64;

use super::{CompensationSpec, LineParams};
use crate::error::{Error, Result};
use crate::transforms::AlphaBetaPair;

/// Two-state αβ current dynamics `i' = A i + B v` with the series capacitor
/// folded into a quadrature coupling of strength `1/(ωC)`.
///
/// The fold assumes the capacitor voltage rotates synchronously with the
/// current, so the model is exact for positive-sequence steady state at ω
/// but does not carry the √N·f0 series resonance; use [`super::AbcPlantModel`]
/// for that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedModel {
    pub a_matrix: Matrix2<f64>,
    pub b_matrix: Matrix2<f64>,
}

pub fn reduced_model(params: &LineParams, comp: &CompensationSpec) -> Result<ReducedModel> {
    params.validate()?;
    if !comp.is_compensated() {
        return Err(Error::invalid(
            "n_pu",
            "the reduced model needs a series capacitor; use the abc plant for an uncompensated line",
        ));
    }
    let l = params.l_series;
    let damping = -params.r_series / l;
    let coupling = 1.0 / (params.omega * comp.c_series_total * l);
    Ok(ReducedModel {
        a_matrix: Matrix2::new(damping, -coupling, coupling, damping),
        b_matrix: Matrix2::identity() / l,
    })
}

impl ReducedModel {
    pub fn derivative(&self, current: AlphaBetaPair, voltage: AlphaBetaPair) -> AlphaBetaPair {
        let a = &self.a_matrix;
        let b = &self.b_matrix;
        AlphaBetaPair::new(
            a[(0, 0)] * current.alpha + a[(0, 1)] * current.beta + b[(0, 0)] * voltage.alpha + b[(0, 1)] * voltage.beta,
            a[(1, 0)] * current.alpha + a[(1, 1)] * current.beta + b[(1, 0)] * voltage.alpha + b[(1, 1)] * voltage.beta,
        )
    }

    /// `−R/L ± j/(ωCL)`.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let re = self.a_matrix[(0, 0)];
        let im = self.a_matrix[(1, 0)];
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> (LineParams, CompensationSpec) {
        let p = LineParams::new(1.0, 0.01, 376.991, 0.0).unwrap();
        let c = CompensationSpec {
            n_pu: 1.0 / (1e-3 * 376.991 * 376.991 * 0.01),
            c_series_total: 1e-3,
            num_segments: 1,
        };
        (p, c)
    }

    #[test]
    fn example_entries() {
        let (p, c) = example();
        let m = reduced_model(&p, &c).unwrap();
        let a = m.a_matrix;
        // 1/(ωCL) = 1/0.00376991
        let k = 1.0 / 0.003_769_91;
        assert!((a[(0, 0)] + 100.0).abs() < 1e-12);
        assert!((a[(1, 1)] + 100.0).abs() < 1e-12);
        assert!((a[(0, 1)] + k).abs() < 1e-9 && (a[(0, 1)] + 265.26).abs() < 5e-3);
        assert!((a[(1, 0)] - k).abs() < 1e-9);
        assert_eq!(m.b_matrix, Matrix2::identity() * 100.0);
    }

    #[test]
    fn eigenvalues_match_characteristic_polynomial() {
        let (p, c) = example();
        let m = reduced_model(&p, &c).unwrap();
        let ev = m.eigenvalues();
        let a = m.a_matrix;
        for lam in ev {
            // λ² − tr(A) λ + det(A) = 0
            let tr = a[(0, 0)] + a[(1, 1)];
            let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
            let r = lam * lam - lam * tr + det;
            assert!(r.norm() < 1e-9 * det.abs());
        }
        assert!((ev[0].re + 100.0).abs() < 1e-12);
        assert!((ev[0].im - 265.26).abs() < 5e-3);
    }

    #[test]
    fn lossless_is_purely_imaginary() {
        let (mut p, c) = example();
        p.r_series = 0.0;
        let m = reduced_model(&p, &c).unwrap();
        let expect = 1.0 / (p.omega * c.c_series_total * p.l_series);
        for lam in m.eigenvalues() {
            assert_eq!(lam.re, 0.0);
            assert!((lam.im.abs() - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_uncompensated() {
        let (p, _) = example();
        assert!(reduced_model(&p, &CompensationSpec::uncompensated()).is_err());
    }
}
