use num_complex::Complex64;

use super::plant::Plant;
use super::{FlowTarget, ModelKind};
use crate::error::{Error, Result};
use crate::line_models::{effective_reactance, max_power, CompensationSpec, LineParams};
use crate::power::BusVoltages;
use crate::transforms::{balanced_phasor, AlphaBetaPair};

/// Sinusoidal steady state that delivers a requested flow.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    /// Bus snapshots at t = 0; `vcon` is zero.
    pub bus: BusVoltages,
    /// Plant state at t = 0.
    pub state: Vec<f64>,
    /// Sending-bus current snapshot, αβ.
    pub current: AlphaBetaPair,
    /// Angle by which the sending bus leads the receiving bus, rad.
    pub delta: f64,
    pub vr_magnitude: f64,
    /// Transfer capability `(3/2)·V²/(ωL(1 − N))` at nominal voltage, W.
    pub limit_w: f64,
}

/// Holds the sending bus at `v_nominal` (αβ peak) with zero angle and solves
/// the receiving-bus angle and magnitude so the sending bus delivers
/// `flow`. The solve is exact because the line is linear: the required
/// current follows from the complex power, and the receiving voltage from
/// the line's steady-state admittances.
pub fn solve_operating_point(
    kind: ModelKind,
    params: &LineParams,
    comp: &CompensationSpec,
    v_nominal: f64,
    flow: &FlowTarget,
) -> Result<OperatingPoint> {
    let plant = Plant::new(kind, params, comp)?;
    solve_with_plant(&plant, params, comp, v_nominal, flow)
}

pub(crate) fn solve_with_plant(
    plant: &Plant,
    params: &LineParams,
    comp: &CompensationSpec,
    v_nominal: f64,
    flow: &FlowTarget,
) -> Result<OperatingPoint> {
    if !(v_nominal.is_finite() && v_nominal > 0.0) {
        return Err(Error::invalid("v_nominal", "must be > 0"));
    }
    flow.validate()?;
    let limit_w = 1.5 * max_power(v_nominal, v_nominal, effective_reactance(params, comp))?;
    let s = flow.delivered();
    if s.p.abs() >= limit_w {
        return Err(Error::Capability {
            requested_w: s.p,
            limit_w,
        });
    }

    let vs = balanced_phasor(v_nominal, 0.0).to_complex();
    let power = Complex64::new(s.p, s.q);
    let current = (power / (1.5 * vs)).conj();
    let zero = Complex64::new(0.0, 0.0);
    let vr = plant.receiving_voltage_for(vs, zero, current);
    let delta = (vs / vr).arg();
    if !(delta.abs() < std::f64::consts::FRAC_PI_2) || !(vr.norm() > 0.0) {
        return Err(Error::Capability {
            requested_w: s.p,
            limit_w,
        });
    }
    let state = plant.steady_state(vs, vr)?;
    Ok(OperatingPoint {
        bus: BusVoltages::new(
            AlphaBetaPair::from_complex(vs),
            AlphaBetaPair::from_complex(vr),
            AlphaBetaPair::ZERO,
        ),
        state,
        current: AlphaBetaPair::from_complex(current),
        delta,
        vr_magnitude: vr.norm(),
        limit_w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::line_models::size_series_capacitor;
    use crate::power::steady_state_pq;
    use crate::sim::PfSign;

    const V_NOM: f64 = 281_691.7;

    #[test]
    fn zero_flow_is_trivial() {
        let p = LineParams::default();
        let c = size_series_capacitor(0.25, &p, 1).unwrap();
        let flow = FlowTarget::new(0.0, 1.0, PfSign::Lagging);
        let op = solve_operating_point(ModelKind::AbcRlc, &p, &c, V_NOM, &flow).unwrap();
        assert!(op.delta.abs() < 1e-12);
        assert!((op.vr_magnitude - V_NOM).abs() < 1e-6);
        assert!(op.state.iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn solved_flow_matches_target() {
        let p = LineParams::default();
        let c = size_series_capacitor(0.25, &p, 1).unwrap();
        let flow = FlowTarget::new(360e6, 0.8, PfSign::Lagging);
        let op = solve_operating_point(ModelKind::AbcRlc, &p, &c, V_NOM, &flow).unwrap();
        let pq = steady_state_pq(&op.bus, &p, &c).unwrap().delivered();
        assert!((pq.p - 288e6).abs() < 1e-6 * 288e6);
        assert!((pq.q - 216e6).abs() < 1e-6 * 216e6);
        assert!(op.delta > 0.0);
    }

    #[test]
    fn beyond_limit_is_a_capability_error() {
        let p = LineParams::default();
        let c = size_series_capacitor(0.25, &p, 1).unwrap();
        let limit = 1.5 * V_NOM * V_NOM / effective_reactance(&p, &c);
        let flow = FlowTarget::new(limit * 1.001, 1.0, PfSign::Lagging);
        match solve_operating_point(ModelKind::AbcRlc, &p, &c, V_NOM, &flow) {
            Err(Error::Capability { limit_w, .. }) => assert!((limit_w - limit).abs() < 1e-6 * limit),
            other => panic!("{other:?}"),
        }
    }
}
