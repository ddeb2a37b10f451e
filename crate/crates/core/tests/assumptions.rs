use wclt::assumptions::{check_cfg, check_fg, check_tail_sufficient, default_cfg_grid, Status};
use wclt::{check_all, CheckOptions, CostFunction, Distribution};

const W2: CostFunction = CostFunction::Power { alpha: 2.0 };

fn d(s: &str) -> Distribution {
    s.parse().unwrap()
}

fn geometric(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).collect()
}

#[test]
fn cfg_margin_grows_as_theta_shrinks() {
    let laws = ["gaussian(0,1)", "pareto(5)", "pareto(3)", "weibull(2)", "exponential(1)"];
    let costs = [W2, CostFunction::Power { alpha: 1.5 }, CostFunction::LogPower { beta: 1.0 }];
    let thetas = [3.0, 2.5, 2.0, 1.8, 1.6];
    for law in laws {
        let f = d(law);
        for c in &costs {
            let valid: Vec<f64> = thetas.iter().copied().filter(|t| *t > 1.0 + c.theta1()).collect();
            let reports: Vec<_> = valid.iter().map(|&t| check_cfg(&f, c, t, None).unwrap()).collect();
            for pair in reports.windows(2) {
                assert!(pair[1].margin >= pair[0].margin, "{law} {c}: margin fell as theta fell");
                if pair[0].check.passed() {
                    assert!(
                        pair[1].check.passed(),
                        "{law} {c}: pass at {} but not at {}",
                        pair[0].theta,
                        pair[1].theta
                    );
                }
            }
        }
    }
}

#[test]
fn tail_sufficient_condition_implies_cfg() {
    for (law, x_lo, x_hi) in [("gaussian(0,1)", 3.0, 8.0), ("pareto(10)", 2.0, 1e6)] {
        let f = d(law);
        let xs = geometric(x_lo, x_hi, 200);
        let suff = check_tail_sufficient(&f, &W2, 2.5, Some(&xs)).unwrap();
        assert_eq!(suff.status, Status::Pass, "{law}");
        let ls: Vec<f64> = xs.iter().map(|&x| W2.l(x)).collect();
        let cfg = check_cfg(&f, &W2, 2.0, Some(&ls)).unwrap();
        assert_eq!(cfg.check.status, Status::Pass, "{law}: margin {}", cfg.margin);
    }
    // Pareto(4) misses the sufficient condition: ψ = 4 ln x < 5 ln x.
    let xs = geometric(2.0, 1e6, 50);
    let r = check_tail_sufficient(&d("pareto(4)"), &W2, 2.5, Some(&xs)).unwrap();
    assert_eq!(r.status, Status::Fail);
    assert!(r.witness.is_some());
}

#[test]
fn symmetric_pairs_have_mirror_image_tails() {
    let (f, g) = (d("gaussian(0,1)"), d("gaussian(0,2)"));
    let right = check_fg(&f, &g, None, 256).unwrap();
    let left = check_fg(&f.reflect(), &g.reflect(), None, 256).unwrap();
    for (a, b) in [
        (&right.fg1, &left.fg1),
        (&right.fg2, &left.fg2),
        (&right.fg3, &left.fg3),
        (&right.fg4, &left.fg4),
        (&right.fg5, &left.fg5),
    ] {
        assert_eq!(a.status, b.status);
        let (va, vb) = (a.value.unwrap(), b.value.unwrap());
        assert!((va - vb).abs() <= 1e-6 * va.abs().max(1.0), "{va} vs {vb}");
    }
    assert_eq!(right.swapped, left.swapped);
    assert!((right.tau0 - left.tau0).abs() < 1e-9);
}

#[test]
fn every_failure_names_a_witness() {
    let cases = [
        ("gaussian(0,1)", "gaussian(0,1)", W2),
        ("pareto(3)", "locscale(pareto(3),2,0)", W2),
        ("gaussian(0,1)", "gaussian(1,2)", CostFunction::ExpPower { beta: 2.5 }),
        ("exponential(1)", "weibull(2)", W2),
    ];
    let mut failures = 0;
    for (f, g, c) in cases {
        let r = check_all(&d(f), &d(g), &c, &CheckOptions::default()).unwrap();
        let mut checks = vec![&r.cfg_right.check, &r.cfg_left.check, &r.tail_sufficient];
        for fg in [&r.fg_right, &r.fg_left] {
            checks.extend([&fg.fg1, &fg.fg2, &fg.fg3, &fg.fg4, &fg.fg5]);
        }
        for check in checks {
            if check.status == Status::Fail {
                failures += 1;
                assert!(check.witness.is_some_and(f64::is_finite), "{f} {g} {c}: {check:?}");
            }
        }
    }
    assert!(failures > 0, "cases were chosen to produce failures");
}

#[test]
fn default_grid_respects_the_floor() {
    for law in ["gaussian(0,1)", "pareto(5)", "weibull(0.5)"] {
        let grid = default_cfg_grid(&d(law), &W2, 64);
        assert!(grid.windows(2).all(|w| w[1] > w[0]), "{law}");
        assert!(check_cfg(&d(law), &W2, 1.5, Some(&grid)).is_ok());
    }
    assert!(check_cfg(&d("gaussian(0,1)"), &W2, 1.0, None).is_err());
}
