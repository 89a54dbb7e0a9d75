use crossover_core::noise::NoisePath;
use proptest::prelude::*;

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn increments_are_standard_gaussian_after_scaling() {
    let path = NoisePath::generate(17, 0.0, 64.0, 16).unwrap();
    let sd = path.cell_width().sqrt();
    let z: Vec<f64> = path.increments().map(|x| x / sd).collect();
    let n = z.len() as f64;
    let (m, v) = moments(&z);
    assert!(m.abs() < 4.0 / n.sqrt(), "mean {m}");
    assert!((v - 1.0).abs() < 4.0 * (2.0 / n).sqrt(), "variance {v}");
    let inside = z.iter().filter(|x| x.abs() < 1.0).count() as f64 / n;
    let p = 0.682_689_492_137_085_9;
    assert!((inside - p).abs() < 4.0 * (p * (1.0 - p) / n).sqrt(), "{inside}");
}

#[test]
fn refined_halves_are_bridge_distributed() {
    // given the coarse increment, each half has conditional variance dt/4
    let path = NoisePath::generate(5, 0.0, 32.0, 13).unwrap();
    let fine = path.refine().unwrap();
    let dt = path.cell_width();
    let dev: Vec<f64> = (0..path.cells())
        .map(|i| (fine.increment(2 * i) - 0.5 * path.increment(i)) / (0.25 * dt).sqrt())
        .collect();
    let n = dev.len() as f64;
    let (m, v) = moments(&dev);
    assert!(m.abs() < 4.0 / n.sqrt());
    assert!((v - 1.0).abs() < 4.0 * (2.0 / n).sqrt(), "variance {v}");
}

#[test]
fn lag_one_correlation_vanishes() {
    let path = NoisePath::generate(23, -10.0, 10.0, 15).unwrap();
    let x: Vec<f64> = path.increments().collect();
    let n = (x.len() - 1) as f64;
    let c: f64 = x.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / n / path.cell_width();
    assert!(c.abs() < 4.0 / n.sqrt(), "{c}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refinement_keeps_coarse_values(seed in any::<u64>(), level in 0u32..10, extra in 1u32..4) {
        let p = NoisePath::generate(seed, -1.0, 3.0, level).unwrap();
        let f = p.refine_to(level + extra).unwrap();
        let k = 1usize << extra;
        for i in 0..=p.cells() {
            prop_assert_eq!(p.value_at_node(i), f.value_at_node(i * k));
        }
    }

    #[test]
    fn generation_agrees_with_refinement(seed in any::<u64>(), level in 0u32..9) {
        let direct = NoisePath::generate(seed, 0.0, 2.0, level + 2).unwrap();
        let refined = NoisePath::generate(seed, 0.0, 2.0, level).unwrap().refine_to(level + 2).unwrap();
        prop_assert_eq!(direct.ticks(), refined.ticks());
    }

    #[test]
    fn reversal_preserves_terminal_value(seed in any::<u64>(), level in 0u32..10) {
        let p = NoisePath::generate(seed, -2.0, 2.0, level).unwrap();
        let r = p.time_reverse(0.0).unwrap();
        prop_assert_eq!(p.terminal_value(), r.terminal_value());
        prop_assert_eq!(r.time_reverse(0.0).unwrap(), p);
    }
}
