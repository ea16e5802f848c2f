use dispersim_core::decay::{alpha_p_empirical, alpha_p_theory, fit_decay, interpolation_exponent, kernel_norms, log_grid};
use dispersim_core::torus::{small_time_grid, torus_l1_norm, torus_scaled_sweep, torus_supnorm_dense, TorusData, DEFAULT_MAX_POINTS};

#[test]
fn sup_norm_of_kernel_decays_at_one_third() {
    let times = log_grid(10.0, 1e4, 40).unwrap();
    let (fit, norms) = alpha_p_empirical(f64::INFINITY, &times).unwrap();
    println!("p = inf slope {:.4} r2 {:.5}", fit.slope, fit.r_squared);
    assert!((-0.36..=-0.30).contains(&fit.slope), "{}", fit.slope);
    assert!(norms.iter().all(|k| k.tail_ratio < 1e-10));
    assert_eq!(fit.theoretical, Some(-1.0 / 3.0));
}

#[test]
fn l6_norm_matches_upper_branch() {
    let times = log_grid(100.0, 1e4, 30).unwrap();
    let (fit, _) = alpha_p_empirical(6.0, &times).unwrap();
    println!("p = 6 slope {:.4}", fit.slope);
    assert!((fit.slope + 5.0 / 18.0).abs() <= 0.04, "{}", fit.slope);
}

#[test]
fn l2_norm_is_conserved() {
    let (fit, _) = alpha_p_empirical(2.0, &log_grid(1.0, 3e3, 20).unwrap()).unwrap();
    assert!(fit.slope.abs() <= 0.02);
}

#[test]
fn decay_beats_naive_interpolation() {
    let times = log_grid(10.0, 1e4, 30).unwrap();
    for p in [2.5, 3.0] {
        let (fit, _) = alpha_p_empirical(p, &times).unwrap();
        let naive = -interpolation_exponent(p);
        println!("p = {p}: slope {:.4}, interpolation {:.4}, theory {:.4}", fit.slope, naive, -alpha_p_theory(p).unwrap());
        assert!(fit.slope <= naive + 0.02);
    }
}

#[test]
fn fit_of_kernel_norms_is_order_independent() {
    let times = log_grid(10.0, 1e3, 12).unwrap();
    let a = kernel_norms(&times, 4.0, 1 << 24).unwrap();
    let b = kernel_norms(&times, 4.0, 1 << 24).unwrap();
    assert_eq!(a, b);
    let values: Vec<f64> = a.iter().map(|k| k.norm).collect();
    let fit = fit_decay(&times, &values, (10.0, 1e3)).unwrap();
    assert!(fit.slope < 0.0);
}

fn torus_constant(cutoff: usize) -> f64 {
    let data = TorusData::uniform(cutoff).unwrap();
    let (_, samples) = torus_scaled_sweep(&data, &small_time_grid(cutoff, 120).unwrap(), 8).unwrap();
    samples.iter().map(|s| s.scaled).fold(0.0, f64::max)
}

#[test]
fn torus_constant_is_stable_in_cutoff() {
    // Dense reference at N = 8.
    let data = TorusData::uniform(8).unwrap();
    let l1 = torus_l1_norm(&data, DEFAULT_MAX_POINTS).unwrap().value;
    let dense = small_time_grid(8, 120)
        .unwrap()
        .into_iter()
        .map(|t| t.sqrt() * torus_supnorm_dense(&data, t, 256 * 17).unwrap().value / l1)
        .fold(0.0, f64::max);
    let c8 = torus_constant(8);
    assert!((c8 - dense).abs() <= 1e-6 * dense, "{c8} vs {dense}");
    let c16 = torus_constant(16);
    let c32 = torus_constant(32);
    println!("torus constants: {c8:.6} {c16:.6} {c32:.6}");
    assert!(c16 <= 1.5 * c8 && c32 <= 1.5 * c16);
    assert!(c32.is_finite());
}

#[test]
fn l1_norm_stable_under_doubling() {
    for n in [8, 32, 128] {
        let l1 = torus_l1_norm(&TorusData::uniform(n).unwrap(), DEFAULT_MAX_POINTS).unwrap();
        assert!(l1.doubling_change <= 1e-6);
    }
}

#[test]
fn alpha_family_within_window() {
    let times = log_grid(100.0, 1e4, 30).unwrap();
    for p in [2.5, 3.0, 6.0, 10.0] {
        let (fit, _) = alpha_p_empirical(p, &times).unwrap();
        let alpha = alpha_p_theory(p).unwrap();
        println!("p = {p}: slope {:.4}, theory {:.4}", fit.slope, -alpha);
        assert!((fit.slope + alpha).abs() <= 0.05, "p={p}: {}", fit.slope);
    }
}
