use vfeel_web::{admission_count, objective_curve, path_loss_profile, run_scheme};

#[test]
fn scheme_curves_have_one_value_per_slot() {
    let c = run_scheme("proposed", 1, 2, 40).unwrap();
    assert_eq!(c.len(), 40);
    assert_eq!(c.accuracy().len(), 40);
    assert!(c.backlog().iter().all(|&q| q <= 2000.0));
    assert!(c.cumulative_selected().windows(2).all(|w| w[0] <= w[1]));
    assert!(run_scheme("greedy", 1, 2, 40).is_err());
    assert!(run_scheme("random", 1, 0, 40).is_err());
}

#[test]
fn admission_count_is_objective_argmax() {
    for q in [0.0, 500.0, 1950.0, 1995.0, 2000.0] {
        let values = objective_curve(q, 30.0, 100);
        let n = admission_count(q, 30.0, 100);
        let best = values
            .iter()
            .copied()
            .filter(|v| !v.is_nan())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(values[n], best, "q = {q}");
        assert!(values.iter().skip(n + 1).all(|v| v.is_nan() || *v < best));
    }
    assert_eq!(admission_count(1995.0, 0.0, 100), 0);
}

#[test]
fn path_loss_dips_under_the_server() {
    let p = path_loss_profile(15.0, 101);
    assert_eq!(p.len(), 101);
    let (argmin, _) = p
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    assert_eq!(argmin, 50);
    assert!((p[0] - p[100]).abs() < 1e-9);
}
