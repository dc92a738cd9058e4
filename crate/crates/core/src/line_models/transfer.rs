use num_complex::Complex64;

use super::{CompensationSpec, LineParams};
use crate::error::{Error, Result};
use crate::transforms::AlphaBetaPair;

/// Entries of the 2×2 admittance matrix from net αβ drive voltage to αβ
/// line current at one complex frequency, A/V.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferFunctionPoint {
    pub g_aa: Complex64,
    pub g_ab: Complex64,
    pub g_ba: Complex64,
    pub g_bb: Complex64,
}

impl TransferFunctionPoint {
    /// Response of the current phasor to a positive-sequence drive whose
    /// αβ snapshot (as `α + jβ`) is `drive`.
    ///
    /// The α channel of such a drive has phasor `drive` and the β channel
    /// `−j·drive`; the returned value is the αβ snapshot of the current.
    pub fn positive_sequence_response(&self, drive: Complex64) -> AlphaBetaPair {
        let j = Complex64::i();
        let i_alpha = self.g_aa * drive - j * self.g_ab * drive;
        let i_beta = self.g_ba * drive - j * self.g_bb * drive;
        AlphaBetaPair::new(i_alpha.re, i_beta.re)
    }
}

/// Evaluates the closed-form line transfer functions
///
/// ```text
/// G_αα = G_ββ =  C²ω²(R + Ls) / (C²L²s²ω² + 2C²LRsω² + C²R²ω² + 1)
/// G_αβ = −G_βα = −Cω / ((L²s²ω² + 2LRsω² + R²ω²)C² + 1)
/// ```
///
/// which equal `(sI − A)⁻¹B` of [`super::reduced_model`].
pub fn transfer_function_eval(
    params: &LineParams,
    comp: &CompensationSpec,
    s: Complex64,
) -> Result<TransferFunctionPoint> {
    params.validate()?;
    if !comp.is_compensated() {
        return Err(Error::invalid(
            "n_pu",
            "transfer functions are defined for a compensated line",
        ));
    }
    let r = params.r_series;
    let l = params.l_series;
    let w = params.omega;
    let c = comp.c_series_total;
    let c2w2 = c * c * w * w;

    let t2 = c2w2 * l * l * s * s;
    let t1 = 2.0 * c2w2 * l * r * s;
    let t0 = c2w2 * r * r + 1.0;
    let den = t2 + t1 + t0;
    let scale = t2.norm() + t1.norm() + t0;
    if !(den.norm() > 1e-14 * scale) {
        return Err(Error::Pole { s });
    }
    let g_aa = c2w2 * (r + l * s) / den;
    let g_ab = Complex64::new(-c * w, 0.0) / den;
    Ok(TransferFunctionPoint {
        g_aa,
        g_ab,
        g_ba: -g_ab,
        g_bb: g_aa,
    })
}

/// Line admittance matrix at `s` for any compensation degree, including the
/// uncompensated limit `G_αα = 1/(R + Ls)`, `G_αβ = 0`.
pub fn line_admittance(
    params: &LineParams,
    comp: &CompensationSpec,
    s: Complex64,
) -> Result<TransferFunctionPoint> {
    if comp.is_compensated() {
        return transfer_function_eval(params, comp, s);
    }
    params.validate()?;
    let z = params.r_series + params.l_series * s;
    if z.norm() == 0.0 {
        return Err(Error::Pole { s });
    }
    let g = z.inv();
    let zero = Complex64::new(0.0, 0.0);
    Ok(TransferFunctionPoint {
        g_aa: g,
        g_ab: zero,
        g_ba: zero,
        g_bb: g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::line_models::{reduced_model, size_series_capacitor};

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
    fn dc_gain_example() {
        let (p, c) = example();
        let g = transfer_function_eval(&p, &c, Complex64::new(0.0, 0.0)).unwrap();
        // −Cω/(C²R²ω² + 1), Cω = 0.376991
        let cw = 0.376_991;
        let expect = -cw / (cw * cw + 1.0);
        assert!((g.g_ab.re - expect).abs() < 1e-15);
        assert!((g.g_ab.re + 0.33009).abs() < 2e-5);
        // R/(R² + 1/(ωC)²) at s = 0
        let xc = 1.0 / cw;
        assert!((g.g_aa.re - 1.0 / (1.0 + xc * xc)).abs() < 1e-14);
    }

    #[test]
    fn structure_holds_everywhere() {
        let (p, c) = example();
        for &(re, im) in &[(0.0, 1.0), (-3.0, 400.0), (50.0, -20.0), (1e3, 1e3)] {
            let g = transfer_function_eval(&p, &c, Complex64::new(re, im)).unwrap();
            assert_eq!(g.g_aa, g.g_bb);
            assert_eq!(g.g_ab, -g.g_ba);
        }
    }

    #[test]
    fn strictly_proper() {
        let (p, c) = example();
        let g = transfer_function_eval(&p, &c, Complex64::new(1e12, 0.0)).unwrap();
        assert!(g.g_aa.norm() < 1e-9 && g.g_ab.norm() < 1e-18);
    }

    #[test]
    fn pole_is_rejected() {
        let (p, c) = example();
        let m = reduced_model(&p, &c).unwrap();
        let pole = m.eigenvalues()[0];
        assert!(matches!(
            transfer_function_eval(&p, &c, pole),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn synchronous_response_is_series_impedance() {
        let p = LineParams::default();
        let c = size_series_capacitor(0.25, &p, 1).unwrap();
        let g = transfer_function_eval(&p, &c, Complex64::new(0.0, p.omega)).unwrap();
        let drive = Complex64::new(1000.0, -2500.0);
        let i = g.positive_sequence_response(drive);
        let z = Complex64::new(p.r_series, p.x_l() - c.x_c(p.omega));
        let expect = drive / z;
        assert!((i.to_complex() - expect).norm() < 1e-12 * expect.norm());
    }

    #[test]
    fn uncompensated_limit() {
        let p = LineParams::default();
        let s = Complex64::new(0.0, p.omega);
        let g0 = line_admittance(&p, &CompensationSpec::uncompensated(), s).unwrap();
        let tiny = size_series_capacitor(1e-9, &p, 1).unwrap();
        let g = line_admittance(&p, &tiny, s).unwrap();
        assert!((g.g_aa - g0.g_aa).norm() < 1e-6 * g0.g_aa.norm());
        assert!(g.g_ab.norm() < 1e-6 * g0.g_aa.norm());
    }
}
