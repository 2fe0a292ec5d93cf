use std::sync::OnceLock;

use hardedge::painleve::*;
use hardedge::Error;

fn long(alpha: f64) -> &'static PainleveSolution {
    static HALF: OnceLock<PainleveSolution> = OnceLock::new();
    static THREE_HALVES: OnceLock<PainleveSolution> = OnceLock::new();
    let cell = if alpha == 0.5 { &HALF } else { &THREE_HALVES };
    cell.get_or_init(|| integrate_r(&PainleveParams::new(alpha).unwrap(), 1e4, 1e-12).unwrap())
}

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

#[test]
fn closed_form_initial_data() {
    let p = PainleveParams::new(0.5).unwrap();
    assert_eq!((p.r0(), p.r1()), (0.0, 2.0));
    assert_eq!((p.q0(), p.t0()), (0.0, 0.0));
    let p = PainleveParams::new(1.5).unwrap();
    assert_eq!((p.r0(), p.r1()), (-1.0, 2.0 / 3.0));
    assert_eq!((p.q0(), p.t0()), (0.0, 0.0));
    let p = PainleveParams::new(0.75).unwrap();
    let a2 = 4.0 * 0.75f64.powi(2);
    assert!((p.q0() - p.r0() * (1.0 + p.r0()) / 2.0).abs() < 1e-16);
    assert!((p.t0() - (a2 - 1.0) * (a2 - 9.0) * (a2 - 13.0) / 1536.0).abs() < 1e-16);
    assert!(p.q0() != 0.0 && p.t0() != 0.0);
}

#[test]
fn integer_alpha_is_refused() {
    for a in [1.0, 2.0] {
        assert!(PainleveParams::new(a).is_err());
    }
    assert!(matches!(PainleveParams::new(-0.5), Err(Error::Domain(_))));
}

#[test]
fn domain_of_integrate_r() {
    let p = PainleveParams::new(0.5).unwrap();
    assert!(matches!(integrate_r(&p, 0.5, 1e-10), Err(Error::Domain(_))));
    assert!(matches!(integrate_r(&p, 10.0, 1e-13), Err(Error::Domain(_))));
    let sol = integrate_r(&p, 10.0, 1e-10).unwrap();
    assert!(matches!(sol.r(11.0), Err(Error::OutOfRange(_))));
}

#[test]
fn residuals_over_the_whole_range() {
    for alpha in [0.5, 1.5] {
        let sol = long(alpha);
        for s in log_points(1e-3, 0.99e4, 100) {
            let r = sol.residual_r_equation(s).unwrap();
            assert!(r.abs() <= 1e-8, "alpha {alpha} s {s}: {r:e}");
            let b = sol.b1_det_residual_fd(s).unwrap();
            assert!(b.abs() <= 1e-8, "alpha {alpha} s {s}: B1 {b:e}");
            let a = sol.residual_alt_third_order(s).unwrap();
            assert!(a.abs() <= 1e-7, "alpha {alpha} s {s}: alt {a:e}");
            assert!(sol.rp(s).unwrap() > 0.0);
        }
    }
}

#[test]
fn identity_form_of_b1_is_exact() {
    let sol = long(0.5);
    for s in [1e-3, 0.3, 7.0, 500.0] {
        assert!(sol.b1_det_residual(s).unwrap().abs() < 1e-12);
    }
}

#[test]
fn coupled_system_residuals() {
    let sol = long(0.5);
    let r = sol.residual_system(1.0).unwrap();
    for x in r {
        assert!(x.abs() <= 1e-6, "{r:?}");
    }
    assert!(r[1].abs() <= 1e-9);
    assert!(r[3].abs() <= 1e-14);
}

#[test]
fn values_at_the_origin() {
    for alpha in [0.5, 1.5, 0.75] {
        let p = PainleveParams::new(alpha).unwrap();
        let sol = integrate_r(&p, 10.0, 1e-12).unwrap();
        let s = 1e-14;
        assert!((sol.r(s).unwrap() - p.r0()).abs() < 1e-12);
        assert!((sol.q_of_s(s).unwrap() - p.q0()).abs() < 1e-12);
        assert!((sol.t_of_s(s).unwrap() - p.t0()).abs() < 1e-12);
        assert!((sol.rp(s).unwrap() - 1.0 / alpha).abs() < 1e-6);
        assert_eq!(sol.t_at_0, p.t0());
    }
    // the free mode c s^{1+a} makes r' - 1/a of order s^a
    let sol = long(0.5);
    assert!((sol.qprime_of_s(1e-16).unwrap() + 1.0).abs() < 1e-6);
    assert!(sol.tprime_of_s(1e-16).unwrap().abs() < 1e-6);
}

#[test]
fn taylor_start_of_the_analytic_part() {
    // r2 = r1^2/(2(1 - a^2)) = 8/3 at a = 1/2
    let p = PainleveParams::new(0.5).unwrap();
    let s0 = 1e-4;
    let [r, rp, rpp] = taylor_start(&p, s0).unwrap();
    assert!((rpp - 2.0 * 8.0 / 3.0).abs() < 1e-2);
    assert!((rp - 2.0).abs() < 1e-2);
    assert!((r - 2.0 * s0).abs() < 1e-6);
}

#[test]
fn large_s_behaviour() {
    for alpha in [0.5, 1.5] {
        let sol = long(alpha);
        let e = |s: f64| sol.r(s).unwrap() - 1.5 * s.powf(2.0 / 3.0) + alpha * s.cbrt();
        let (e3, e4) = (e(1e3), e(1e4));
        assert!(e4.abs() <= 10.0, "alpha {alpha}: e(1e4) = {e4}");
        assert!((e4 - e3).abs() <= e3.abs(), "alpha {alpha}: {e3} {e4}");
        for s in log_points(1e3, 1e4, 20) {
            assert!(e(s).abs() <= 10.0);
        }
    }
}

#[test]
fn self_convergence() {
    let p = PainleveParams::new(0.5).unwrap();
    let tol = 1e-10;
    let a = integrate_r(&p, 100.0, tol).unwrap();
    let b = integrate_r(&p, 100.0, tol / 2.0).unwrap();
    let c = integrate_r(&p, 100.0, tol / 100.0).unwrap();
    let d = (a.r(100.0).unwrap() - b.r(100.0).unwrap()).abs();
    assert!(d <= 20.0 * tol, "{d:e}");
    assert!((a.r(1.0).unwrap() - c.r(1.0).unwrap()).abs() <= 10.0 * tol);
}

#[test]
fn piii_matches_s_times_r_prime() {
    let tol = 1e-12;
    for alpha in [0.5, 1.5, 2.5] {
        let p = PainleveParams::new(alpha).unwrap();
        let r = integrate_r(&p, 60.0, tol).unwrap();
        let v = integrate_piii(&p, 60.0, tol).unwrap();
        for s in log_points(0.1, 50.0, 60) {
            let d = (v.v(s).unwrap()[0] - s * r.rp(s).unwrap()).abs();
            assert!(d <= 100.0 * tol, "alpha {alpha} s {s}: {d:e}");
            assert!(v.residual(s).unwrap().abs() <= 1e-8);
        }
    }
}

#[test]
fn piii_slope_at_the_origin() {
    let v = integrate_piii(&PainleveParams::new(0.5).unwrap(), 10.0, 1e-12).unwrap();
    for s in [1e-14, 1e-16] {
        assert!((v.v(s).unwrap()[0] / s - 2.0).abs() < 1e-6);
    }
}

#[test]
fn perturbed_initial_slope_leaves_a_proportional_residual() {
    // The r-equation ties r(0) to r'(0), so the solution with r'(0) = 1/a + 0.1
    // is the separatrix at a' = 1/r'(0). Against the original a the
    // alternative equation leaves exactly (1/r'(0) - a) r'.
    let alpha: f64 = 0.5;
    for dr in [0.1, 0.05] {
        let r1 = 1.0 / alpha + dr;
        let sol = integrate_r(&PainleveParams::new(1.0 / r1).unwrap(), 20.0, 1e-12).unwrap();
        for s in [0.1, 1.0, 10.0] {
            let st = sol.state(s).unwrap();
            let (p, w) = (st.rp, st.rpp);
            let lhs = s * s * p * st.rppp - s * s * w * w + s * p * w - s * p * p * p - alpha * p + 1.0;
            let want = (1.0 / r1 - alpha) * p;
            assert!((lhs - want).abs() < 1e-8 * (1.0 + want.abs()), "dr {dr} s {s}: {lhs} vs {want}");
        }
    }
}

#[test]
fn solution_is_pole_free_and_increasing() {
    let sol = long(1.5);
    let mut prev = f64::NEG_INFINITY;
    for s in log_points(1e-3, 1e4, 200) {
        let r = sol.r(s).unwrap();
        assert!(r.is_finite() && r > prev);
        prev = r;
    }
}
