use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{CompensationSpec, LineParams};
use crate::error::{Error, Result};

const PHASES: [&str; 3] = ["a", "b", "c"];

/// Continuous-time state-space model `x' = A x + B u`, `y = C x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub state_names: Vec<String>,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
}

impl LtiModel {
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let n = self.state_dim();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(u.len(), self.input_dim());
        for (i, d) in dx.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate() {
                acc += self.a[(i, j)] * xj;
            }
            for (j, uj) in u.iter().enumerate() {
                acc += self.b[(i, j)] * uj;
            }
            *d = acc;
        }
    }

    pub fn output(&self, x: &[f64]) -> Vec<f64> {
        (0..self.output_dim())
            .map(|i| x.iter().enumerate().map(|(j, xj)| self.c[(i, j)] * xj).sum())
            .collect()
    }

    pub fn output_index(&self, name: &str) -> Option<usize> {
        self.output_names.iter().position(|n| n == name)
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.a.clone().complex_eigenvalues().iter().copied().collect()
    }

    /// Steady-state complex state `(sI − A)⁻¹ B u` for input phasors `u`.
    pub fn phasor_state(&self, s: Complex64, u: &[Complex64]) -> Result<DVector<Complex64>> {
        let n = self.state_dim();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
            diag - self.a[(i, j)]
        });
        let rhs = DVector::from_fn(n, |i, _| {
            u.iter()
                .enumerate()
                .map(|(j, uj)| self.b[(i, j)] * uj)
                .sum::<Complex64>()
        });
        m.lu().solve(&rhs).ok_or(Error::Pole { s })
    }

    /// Output phasors for input phasors `u` at complex frequency `s`.
    pub fn phasor_response(&self, s: Complex64, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let x = self.phasor_state(s, u)?;
        Ok((0..self.output_dim())
            .map(|i| (0..self.state_dim()).map(|j| self.c[(i, j)] * x[j]).sum())
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Lumped series R–L–C per phase.
    SeriesRlc,
    /// Two cascaded half-line π sections with the series capacitor at midline.
    SplitPi,
}

/// Three-phase line plant, one identical block per phase laid out
/// phase-major in the state vector.
///
/// Outputs always start with the three sending-end line currents `i_a`,
/// `i_b`, `i_c`; compensated plants follow with the series capacitor
/// voltages `vc_*`. The split-π plant also reports the current through the
/// series capacitor as `i_mid_*`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbcPlantModel {
    pub topology: Topology,
    pub lti: LtiModel,
    pub states_per_phase: usize,
    pub compensated: bool,
}

impl AbcPlantModel {
    pub fn state_dim(&self) -> usize {
        self.lti.state_dim()
    }

    /// Eigenvalues of one phase block (all three blocks are identical).
    pub fn phase_block_eigenvalues(&self) -> Vec<Complex64> {
        let k = self.states_per_phase;
        let block = self.lti.a.view((0, 0), (k, k)).into_owned();
        block.complex_eigenvalues().iter().copied().collect()
    }
}

/// Assembles a block-diagonal three-phase model from one phase's matrices.
/// Inputs of the block are grouped by kind, one group per phase triple.
fn replicate_phases(
    a1: &DMatrix<f64>,
    b1: &DMatrix<f64>,
    c1: &DMatrix<f64>,
    state_stems: &[&str],
    input_stems: &[&str],
    output_stems: &[&str],
) -> LtiModel {
    let (k, m, q) = (a1.nrows(), b1.ncols(), c1.nrows());
    let mut a = DMatrix::zeros(3 * k, 3 * k);
    let mut b = DMatrix::zeros(3 * k, 3 * m);
    let mut c = DMatrix::zeros(3 * q, 3 * k);
    for p in 0..3 {
        a.view_mut((p * k, p * k), (k, k)).copy_from(a1);
        for g in 0..m {
            for i in 0..k {
                b[(p * k + i, g * 3 + p)] = b1[(i, g)];
            }
        }
        for o in 0..q {
            for j in 0..k {
                c[(o * 3 + p, p * k + j)] = c1[(o, j)];
            }
        }
    }
    let names = |stems: &[&str], phase_major: bool| -> Vec<String> {
        if phase_major {
            PHASES
                .iter()
                .flat_map(|ph| stems.iter().map(move |s| format!("{s}_{ph}")))
                .collect()
        } else {
            stems
                .iter()
                .flat_map(|s| PHASES.iter().map(move |ph| format!("{s}_{ph}")))
                .collect()
        }
    };
    LtiModel {
        a,
        b,
        c,
        state_names: names(state_stems, true),
        input_names: names(input_stems, false),
        output_names: names(output_stems, false),
    }
}

/// Per-phase series RLC loop `L i' = −v_C − R i + v`, `C v_C' = i`, driven by
/// the net voltage `v = v_S − v_R + v_CON` of each phase.
pub fn build_abc_plant(params: &LineParams, comp: &CompensationSpec) -> Result<AbcPlantModel> {
    params.validate()?;
    let r = params.r_series;
    let l = params.l_series;
    let (a1, b1, c1, states, outputs): (_, _, _, &[&str], &[&str]) = if comp.is_compensated() {
        let c = comp.c_series_total;
        (
            DMatrix::from_row_slice(2, 2, &[-r / l, -1.0 / l, 1.0 / c, 0.0]),
            DMatrix::from_row_slice(2, 1, &[1.0 / l, 0.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            &["i", "vc"],
            &["i", "vc"],
        )
    } else {
        (
            DMatrix::from_element(1, 1, -r / l),
            DMatrix::from_element(1, 1, 1.0 / l),
            DMatrix::from_element(1, 1, 1.0),
            &["i"],
            &["i"],
        )
    };
    let lti = replicate_phases(&a1, &b1, &c1, states, &["v"], outputs);
    Ok(AbcPlantModel {
        topology: Topology::SeriesRlc,
        states_per_phase: a1.nrows(),
        compensated: comp.is_compensated(),
        lti,
    })
}

/// Split-π line: sending node → R/2, L/2 → midline → R/2, L/2 → receiving
/// node, with the series capacitor at midline.
///
/// `c_shunt_per_end` is the end capacitance of the full-line nominal π. Each
/// half section is a π with half of it at each of its ends, so the sending
/// and receiving nodes carry `c/2` and the midline carries `c` in total,
/// split `c/2` on either side of the series capacitor. The end nodes are
/// held by the bus sources, so their shunt capacitors draw charging current
/// from the buses but add no states. Per phase the states are the two branch
/// currents and the two midline node voltages (a single midline node when
/// uncompensated); the series capacitor voltage is their difference.
///
/// Inputs are the sending node voltages `us_*` (bus plus series injection)
/// followed by the receiving bus voltages `ur_*`.
pub fn build_split_pi(params: &LineParams, comp: &CompensationSpec) -> Result<AbcPlantModel> {
    params.validate()?;
    if params.c_shunt_per_end <= 0.0 {
        return Err(Error::invalid(
            "c_shunt_per_end",
            "split-π model needs shunt capacitance; use the series RLC plant otherwise",
        ));
    }
    let rh = params.r_series / 2.0;
    let lh = params.l_series / 2.0;
    let cm = params.c_shunt_per_end / 2.0;

    let (a1, b1, c1, states, outputs): (_, _, _, &[&str], &[&str]) = if comp.is_compensated() {
        let cc = comp.c_series_total;
        let det = cm * (cm + 2.0 * cc);
        let p = (cm + cc) / det;
        let q = cc / det;
        // states: i1, i2, vm1, vm2
        let a1 = DMatrix::from_row_slice(
            4,
            4,
            &[
                -rh / lh, 0.0, -1.0 / lh, 0.0, //
                0.0, -rh / lh, 0.0, 1.0 / lh, //
                p, -q, 0.0, 0.0, //
                q, -p, 0.0, 0.0,
            ],
        );
        let b1 = DMatrix::from_row_slice(4, 2, &[1.0 / lh, 0.0, 0.0, -1.0 / lh, 0.0, 0.0, 0.0, 0.0]);
        // capacitor current i1 − cm·vm1'
        let mid_i1 = 1.0 - cm * p;
        let mid_i2 = cm * q;
        let c1 = DMatrix::from_row_slice(
            3,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, -1.0, //
                mid_i1, mid_i2, 0.0, 0.0,
            ],
        );
        (a1, b1, c1, &["i1", "i2", "vm1", "vm2"], &["i", "vc", "i_mid"])
    } else {
        let cmid = 2.0 * cm;
        let a1 = DMatrix::from_row_slice(
            3,
            3,
            &[
                -rh / lh, 0.0, -1.0 / lh, //
                0.0, -rh / lh, 1.0 / lh, //
                1.0 / cmid, -1.0 / cmid, 0.0,
            ],
        );
        let b1 = DMatrix::from_row_slice(3, 2, &[1.0 / lh, 0.0, 0.0, -1.0 / lh, 0.0, 0.0]);
        let c1 = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.5, 0.5, 0.0]);
        (a1, b1, c1, &["i1", "i2", "vm"], &["i", "i_mid"])
    };
    let lti = replicate_phases(&a1, &b1, &c1, states, &["us", "ur"], outputs);
    Ok(AbcPlantModel {
        topology: Topology::SplitPi,
        states_per_phase: a1.nrows(),
        compensated: comp.is_compensated(),
        lti,
    })
}
