//! Quadrature checks of the marginal densities against first principles:
//! total mass, moments, and the Chapman-Kolmogorov composition law.

use martopt::density::{drifted_density, heat_kernel};

/// Composite Simpson rule on [a, b] with `n` panels (n even).
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

#[test]
fn heat_kernel_integrates_to_one() {
    for t in [0.1f64, 1.0, 5.0] {
        let sd = t.sqrt();
        let mass = simpson(|x| heat_kernel(x, t).unwrap(), -12.0 * sd, 12.0 * sd, 4000);
        assert!((mass - 1.0).abs() < 1e-8, "t = {t}: mass = {mass}");
    }
}

#[test]
fn heat_kernel_second_moment_is_t() {
    for t in [0.5f64, 2.0] {
        let sd = t.sqrt();
        let m2 = simpson(|x| x * x * heat_kernel(x, t).unwrap(), -14.0 * sd, 14.0 * sd, 6000);
        assert!((m2 - t).abs() < 1e-8, "t = {t}: second moment = {m2}");
    }
}

#[test]
fn drifted_density_mean_is_ct() {
    let (c, t) = (0.3f64, 2.0f64);
    let sd = t.sqrt();
    let center = c * t;
    let mean = simpson(
        |x| x * drifted_density(x, t, c).unwrap(),
        center - 14.0 * sd,
        center + 14.0 * sd,
        6000,
    );
    assert!((mean - 0.6).abs() < 1e-8, "mean = {mean}");
}

#[test]
fn drifted_density_integrates_to_one_off_center() {
    let (c, t) = (-0.7f64, 1.5f64);
    let sd = t.sqrt();
    let center = c * t;
    let mass = simpson(
        |x| drifted_density(x, t, c).unwrap(),
        center - 13.0 * sd,
        center + 13.0 * sd,
        6000,
    );
    assert!((mass - 1.0).abs() < 1e-8, "mass = {mass}");
}

#[test]
fn chapman_kolmogorov_composition() {
    // integrating over an intermediate time recovers the kernel; the kernel
    // is translation invariant, so the second factor reads the displacement
    let (s, t) = (0.4, 1.0);
    for z in [-1.0, 0.0, 1.5] {
        let direct = heat_kernel(z, t).unwrap();
        let composed = simpson(
            |y| heat_kernel(y, s).unwrap() * heat_kernel(z - y, t - s).unwrap(),
            z.min(0.0) - 14.0,
            z.max(0.0) + 14.0,
            8000,
        );
        assert!(
            (composed - direct).abs() < 1e-8,
            "z = {z}: composed = {composed}, direct = {direct}"
        );
    }
}

#[test]
fn drifted_density_rejects_bad_arguments() {
    assert!(drifted_density(0.0, 0.0, 0.1).is_err());
    assert!(drifted_density(0.0, -1.0, 0.1).is_err());
    assert!(drifted_density(f64::NAN, 1.0, 0.1).is_err());
}
