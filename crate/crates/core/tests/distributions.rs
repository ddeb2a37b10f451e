use proptest::prelude::*;
use wclt::{Distribution, Error};

fn closed_form_laws() -> Vec<Distribution> {
    vec![
        Distribution::Pareto { shape: 0.5 },
        Distribution::Pareto { shape: 3.0 },
        Distribution::Weibull { shape: 0.7 },
        Distribution::Weibull { shape: 2.0 },
        Distribution::Exponential { rate: 1.5 },
        Distribution::location_scale(Distribution::Pareto { shape: 4.0 }, 2.0, -3.0).unwrap(),
    ]
}

fn gaussian_laws() -> Vec<Distribution> {
    vec![
        Distribution::Gaussian { mean: 0.0, sd: 1.0 },
        Distribution::Gaussian { mean: -2.0, sd: 0.3 },
        Distribution::location_scale(Distribution::Gaussian { mean: 0.0, sd: 1.0 }, 3.0, 1.0).unwrap(),
    ]
}

/// Geometric towards both edges of `(1e-6, 1 - 1e-6)`.
fn u_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=60).map(|i| 1e-6 * 10f64.powf(i as f64 * 5.0 / 60.0)).collect();
    g.extend((1..99).map(|i| i as f64 / 100.0));
    g.extend((0..=60).map(|i| 1.0 - 1e-6 * 10f64.powf(i as f64 * 5.0 / 60.0)));
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    g
}

#[test]
fn cdf_inverts_quantile() {
    for (laws, tol) in [(closed_form_laws(), 1e-10), (gaussian_laws(), 1e-8)] {
        for d in laws {
            for u in u_grid() {
                let back = d.cdf(d.quantile(u).unwrap());
                assert!((back - u).abs() < tol, "{d} u={u} back={back}");
            }
        }
    }
}

#[test]
fn density_quantile_is_pdf_of_quantile() {
    for d in closed_form_laws().into_iter().chain(gaussian_laws()) {
        for u in u_grid() {
            let h = d.density_quantile(u).unwrap();
            let direct = d.pdf(d.quantile(u).unwrap());
            assert!((h - direct).abs() < 1e-10, "{d} u={u}");
        }
    }
}

#[test]
fn pareto_companion_is_constant() {
    for p in [0.5, 1.0, 3.0, 7.5] {
        let d = Distribution::Pareto { shape: p };
        let worst = u_grid()
            .into_iter()
            .map(|u| (d.companion(u).unwrap() - 1.0 / p).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "p={p} worst={worst}");
    }
}

#[test]
fn quantile_is_strictly_increasing() {
    for d in closed_form_laws().into_iter().chain(gaussian_laws()) {
        let qs: Vec<f64> = u_grid().into_iter().map(|u| d.quantile(u).unwrap()).collect();
        assert!(qs.windows(2).all(|w| w[0] < w[1]), "{d}");
    }
}

#[test]
fn quantile_slope_is_reciprocal_density_quantile() {
    let h = 1e-6;
    for d in closed_form_laws().into_iter().chain(gaussian_laws()) {
        for i in 1..200 {
            let u = 1e-3 + (1.0 - 2e-3) * i as f64 / 200.0;
            let fd = (d.quantile(u + h).unwrap() - d.quantile(u - h).unwrap()) / (2.0 * h);
            let exact = 1.0 / d.density_quantile(u).unwrap();
            assert!((fd - exact).abs() / exact < 1e-4, "{d} u={u}");
        }
    }
}

#[test]
fn probabilities_outside_the_open_interval_are_rejected() {
    let d = Distribution::Gaussian { mean: 0.0, sd: 1.0 };
    for u in [0.0, 1.0, -0.1, f64::NAN] {
        assert!(matches!(d.quantile(u), Err(Error::InvalidProbability(_))));
    }
    assert!(matches!(
        Distribution::Gaussian { mean: 0.0, sd: 1.0 }.companion(0.5),
        Err(Error::SingularPoint(_))
    ));
}

proptest! {
    #[test]
    fn tail_exponent_is_monotone_and_invertible(p in 0.5f64..8.0, x in 1.01f64..1e3, dx in 0.0f64..10.0) {
        let d = Distribution::Pareto { shape: p };
        let a = d.tail_exponent(x).unwrap();
        let b = d.tail_exponent(x + dx).unwrap();
        prop_assert!(b >= a);
        let back = d.psi_inverse(a).unwrap();
        prop_assert!((back - x).abs() / x < 1e-10);
    }

    #[test]
    fn gaussian_psi_inverse_round_trips(mean in -3.0f64..3.0, sd in 0.2f64..4.0, z in -3.0f64..30.0) {
        let d = Distribution::Gaussian { mean, sd };
        let x = mean + sd * z;
        let back = d.psi_inverse(d.tail_exponent(x).unwrap()).unwrap();
        prop_assert!((back - x).abs() < 1e-7 * x.abs().max(1.0), "x={} back={}", x, back);
    }

    #[test]
    fn descriptors_round_trip(shape in 0.1f64..10.0, a in 0.1f64..5.0, b in -5.0f64..5.0) {
        for d in [
            Distribution::Weibull { shape },
            Distribution::location_scale(Distribution::Pareto { shape }, a, b).unwrap(),
            Distribution::Gaussian { mean: b, sd: a }.reflect(),
        ] {
            let parsed: Distribution = d.to_string().parse().unwrap();
            prop_assert_eq!(&parsed, &d);
            let json = serde_json::to_string(&d).unwrap();
            prop_assert_eq!(serde_json::from_str::<Distribution>(&json).unwrap(), d);
        }
    }
}
