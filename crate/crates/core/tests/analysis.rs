use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sercomp::analysis::*;
use sercomp::line_models::{compensation_for, LineParams};

const DT: f64 = 20e-6;

fn tone(n: usize, f: f64, sigma: f64, amp: f64, phase: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 * DT;
            amp * (-sigma * t).exp() * (2.0 * PI * f * t + phase).sin()
        })
        .collect()
}

#[test]
fn single_tone_accuracy_over_random_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let f = rng.random_range(5.0..120.0);
        let x = tone(25_001, f, 0.0, 1.0, rng.random_range(0.0..2.0 * PI));
        let s = dominant_frequency(&x, DT, (0.0, 0.5)).unwrap();
        let tol = (s.resolution / 4.0).max(0.005 * f);
        assert!((s.peak_frequency - f).abs() <= tol, "f {f}: got {}", s.peak_frequency);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimates_ignore_amplitude_scaling(f in 10.0f64..60.0, sigma in 1.0f64..15.0, scale in 1e-3f64..1e6) {
        let x = tone(40_001, f, sigma, 1.0, 0.3);
        let y: Vec<f64> = x.iter().map(|v| v * scale).collect();
        let fx = dominant_frequency(&x, DT, (0.0, 0.8)).unwrap();
        let fy = dominant_frequency(&y, DT, (0.0, 0.8)).unwrap();
        prop_assert!((fx.peak_frequency - fy.peak_frequency).abs() < 1e-9 * f);
        let sx = damping_estimate(&x, DT, (0.0, 0.8)).unwrap();
        let sy = damping_estimate(&y, DT, (0.0, 0.8)).unwrap();
        prop_assert!((sx - sy).abs() < 1e-6 * sigma);
        prop_assert!((sx - sigma).abs() < 0.05 * sigma);
    }

    #[test]
    fn sweep_peak_location_and_scaling(k in 0.1f64..3.0, n in 0.0f64..0.6) {
        let p = LineParams { r_series: 0.0, ..LineParams::default() };
        let c = compensation_for(n, &p, 1).unwrap();
        let v = 2.8e5;
        let a = p_delta_sweep(&p, &c, v, v, (0.0, 179.0), 180).unwrap();
        let b = p_delta_sweep(&p, &c, k * v, k * v, (0.0, 179.0), 180).unwrap();
        let (pa, pb) = (sweep_peak(&a).unwrap(), sweep_peak(&b).unwrap());
        prop_assert_eq!(pa.delta_deg, pb.delta_deg);
        prop_assert!((pb.p_w / pa.p_w - k * k).abs() < 1e-9 * k * k);
    }
}

#[test]
fn lossless_sweep_is_odd_and_monotone() {
    let p = LineParams { r_series: 0.0, ..LineParams::default() };
    let c = compensation_for(0.25, &p, 1).unwrap();
    let rows = p_delta_sweep(&p, &c, 2.8e5, 2.8e5, (-90.0, 90.0), 181).unwrap();
    for (lo, hi) in rows.iter().zip(rows.iter().rev()) {
        assert!((lo.p_w + hi.p_w).abs() < 1e-6 * hi.p_w.abs().max(1.0));
    }
    assert!(rows[90..].windows(2).all(|w| w[1].p_w > w[0].p_w));
    assert!(p_delta_sweep(&p, &c, 1.0, 1.0, (-180.0, 0.0), 10).is_err());
    assert!(p_delta_sweep(&p, &c, 1.0, 1.0, (0.0, 10.0), 1).is_err());
}
