use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ModelKind;
use crate::error::Result;
use crate::line_models::{
    build_abc_plant, build_split_pi, reduced_model, CompensationSpec, LineParams, LtiModel,
};
use crate::transforms::{clarke, inverse_clarke, AlphaBetaPair, ThreePhaseSample};

/// Simulation-side view of a plant: maps bus voltages onto model inputs and
/// model states onto αβ line quantities.
#[derive(Debug, Clone)]
pub(crate) struct Plant {
    pub kind: ModelKind,
    pub lti: LtiModel,
    omega: f64,
    /// 1/(ωC) of the series capacitor, used by the reduced model's
    /// capacitor-voltage reconstruction.
    x_c: f64,
    compensated: bool,
    /// Steady-state branch current `I = y_send·Us − y_recv·Ur` (αβ phasors).
    y_send: Complex64,
    y_recv: Complex64,
}

fn sequence_phasors(z: Complex64) -> [Complex64; 3] {
    let rot = Complex64::from_polar(1.0, -2.0 * PI / 3.0);
    [z, z * rot, z * rot.conj()]
}

impl Plant {
    pub fn new(kind: ModelKind, params: &LineParams, comp: &CompensationSpec) -> Result<Self> {
        let lti = match kind {
            ModelKind::AbcRlc => build_abc_plant(params, comp)?.lti,
            ModelKind::SplitPi => build_split_pi(params, comp)?.lti,
            ModelKind::Reduced => {
                let m = reduced_model(params, comp)?;
                let lti = LtiModel {
                    a: DMatrix::from_iterator(2, 2, m.a_matrix.iter().copied()),
                    b: DMatrix::from_iterator(2, 2, m.b_matrix.iter().copied()),
                    c: DMatrix::identity(2, 2),
                    state_names: vec!["i_alpha".into(), "i_beta".into()],
                    input_names: vec!["v_alpha".into(), "v_beta".into()],
                    output_names: vec!["i_alpha".into(), "i_beta".into()],
                };
                lti
            }
        };
        let mut plant = Self {
            kind,
            lti,
            omega: params.omega,
            x_c: comp.x_c(params.omega),
            compensated: comp.is_compensated(),
            y_send: Complex64::new(0.0, 0.0),
            y_recv: Complex64::new(0.0, 0.0),
        };
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        plant.y_send = plant.steady_branch_current(one, zero)?;
        plant.y_recv = -plant.steady_branch_current(zero, one)?;
        Ok(plant)
    }

    fn input_phasors(&self, us: Complex64, ur: Complex64) -> Vec<Complex64> {
        match self.kind {
            ModelKind::AbcRlc => sequence_phasors(us - ur).to_vec(),
            ModelKind::SplitPi => {
                let mut u = sequence_phasors(us).to_vec();
                u.extend(sequence_phasors(ur));
                u
            }
            ModelKind::Reduced => {
                let net = us - ur;
                vec![net, -Complex64::i() * net]
            }
        }
    }

    /// Fills the model input vector for instantaneous sending-node voltage
    /// `us` (bus plus injection) and receiving bus voltage `ur`.
    pub fn fill_inputs(&self, us: AlphaBetaPair, ur: AlphaBetaPair, u: &mut [f64]) {
        match self.kind {
            ModelKind::AbcRlc => {
                let v = inverse_clarke(us - ur);
                u.copy_from_slice(&[v.a, v.b, v.c]);
            }
            ModelKind::SplitPi => {
                let s = inverse_clarke(us);
                let r = inverse_clarke(ur);
                u.copy_from_slice(&[s.a, s.b, s.c, r.a, r.b, r.c]);
            }
            ModelKind::Reduced => {
                let v = us - ur;
                u.copy_from_slice(&[v.alpha, v.beta]);
            }
        }
    }

    pub fn phase_currents(&self, x: &[f64]) -> ThreePhaseSample {
        match self.kind {
            ModelKind::Reduced => inverse_clarke(AlphaBetaPair::new(x[0], x[1])),
            _ => {
                let y = self.lti.output(x);
                ThreePhaseSample::new(y[0], y[1], y[2])
            }
        }
    }

    /// Current of the first line branch, αβ. Flows are metered here, on the
    /// line side of any shunt across the sending bus.
    pub fn branch_current(&self, x: &[f64]) -> AlphaBetaPair {
        match self.kind {
            ModelKind::Reduced => AlphaBetaPair::new(x[0], x[1]),
            _ => clarke(self.phase_currents(x)),
        }
    }

    pub fn cap_voltages(&self, x: &[f64]) -> ThreePhaseSample {
        if !self.compensated {
            return ThreePhaseSample::default();
        }
        match self.kind {
            ModelKind::Reduced => {
                // v_C = −(1/ωC)·quadrature(i)
                let vc = AlphaBetaPair::new(x[1], -x[0]) * self.x_c;
                inverse_clarke(vc)
            }
            _ => {
                let y = self.lti.output(x);
                ThreePhaseSample::new(y[3], y[4], y[5])
            }
        }
    }

    /// Phasor (αβ snapshot) of the steady-state branch current.
    pub fn steady_branch_current(&self, us: Complex64, ur: Complex64) -> Result<Complex64> {
        let s = Complex64::new(0.0, self.omega);
        let u = self.input_phasors(us, ur);
        let y = self.lti.phasor_response(s, &u)?;
        Ok(y[0])
    }

    /// Linear map of [`Self::steady_branch_current`], without a solve.
    pub fn steady_branch_current_fast(&self, us: Complex64, ur: Complex64) -> Complex64 {
        self.y_send * us - self.y_recv * ur
    }

    /// Receiving-bus phasor that makes the metered current equal `current`
    /// for the given `vs` and `vcon`.
    pub fn receiving_voltage_for(&self, vs: Complex64, vcon: Complex64, current: Complex64) -> Complex64 {
        (self.y_send * (vs + vcon) - current) / self.y_recv
    }

    /// Series R–L–C line with the same synchronous-frequency behaviour seen
    /// from the sending end: impedance `1/y_send`, keeping the series
    /// capacitor, driven by the receiving bus scaled by the returned factor.
    /// Identity for the lumped models.
    pub fn synchronous_equivalent(&self, params: &LineParams, comp: &CompensationSpec) -> (LineParams, Complex64) {
        let z = self.y_send.inv();
        let equivalent = LineParams {
            r_series: z.re,
            l_series: (z.im + comp.x_c(self.omega)) / self.omega,
            ..*params
        };
        (equivalent, self.y_recv / self.y_send)
    }

    /// Sinusoidal steady-state plant state at the phasor reference instant.
    pub fn steady_state(&self, us: Complex64, ur: Complex64) -> Result<Vec<f64>> {
        let s = Complex64::new(0.0, self.omega);
        let x = self.lti.phasor_state(s, &self.input_phasors(us, ur))?;
        Ok(x.iter().map(|z| z.re).collect())
    }
}
