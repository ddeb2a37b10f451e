use wclt::variance::{sigma2_gaussian, sigma2_location_scale, sigma2_w2_independent, variance_kernel, CLAMP_FLOOR};
use wclt::{confidence_interval, plug_in_sigma2, sigma2, sigma2_one_sample, CostFunction, Coupling, Distribution, QuadratureConfig, Side};

const W2: CostFunction = CostFunction::Power { alpha: 2.0 };

fn n(mean: f64, sd: f64) -> Distribution {
    Distribution::Gaussian { mean, sd }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn kernel_is_symmetric() {
    let (f, g) = (n(0.0, 1.0), Distribution::Weibull { shape: 2.0 });
    let costs = [W2, CostFunction::Power { alpha: 3.0 }, CostFunction::LogPower { beta: 1.0 }];
    let couplings = [
        Coupling::Independent,
        Coupling::Comonotone,
        Coupling::Gaussian { r: 0.4 },
        Coupling::Gaussian { r: -0.6 },
    ];
    let grid = [0.01, 0.1, 0.33, 0.5, 0.72, 0.9, 0.995];
    for c in &costs {
        for cp in &couplings {
            for &u in &grid {
                for &v in &grid {
                    let a = variance_kernel(&f, &g, c, cp, u, v).unwrap();
                    let b = variance_kernel(&f, &g, c, cp, v, u).unwrap();
                    assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{c} {cp} ({u},{v}): {a} vs {b}");
                }
            }
        }
    }
    assert!(variance_kernel(&f, &g, &W2, &Coupling::Independent, 0.0, 0.5).is_err());
}

#[test]
fn three_routes_agree_on_gaussian_pairs() {
    let q = QuadratureConfig::for_variance();
    for (nu, zeta, mu, xi) in [(0.0, 1.0, 1.0, 2.0), (-1.0, 0.5, 2.0, 0.5), (3.0, 1.5, 0.0, 1.0)] {
        let (f, g) = (n(nu, zeta), n(mu, xi));
        let formula = sigma2_gaussian(nu, zeta, mu, xi).unwrap().value;
        let quad = sigma2(&f, &g, &W2, &Coupling::Independent, &q).unwrap().value;
        let moments = sigma2_w2_independent(&f, &g, &q).unwrap().value;
        let s = zeta * zeta + xi * xi;
        let hand = 4.0 * s * (nu - mu) * (nu - mu) + 2.0 * s * (zeta - xi) * (zeta - xi);
        assert!(rel(formula, hand) < 1e-14);
        assert!(rel(quad, formula) < 1e-3, "quadrature {quad} vs {formula}");
        assert!(rel(moments, formula) < 1e-3, "moments {moments} vs {formula}");
    }
}

#[test]
fn comonotone_sampling_reduces_variance_for_w2() {
    let q = QuadratureConfig::for_variance();
    let (f, g) = (n(0.0, 1.0), n(1.0, 2.0));
    let co = sigma2(&f, &g, &W2, &Coupling::Comonotone, &q).unwrap().value;
    let ind = sigma2(&f, &g, &W2, &Coupling::Independent, &q).unwrap().value;
    assert!(co <= ind, "{co} > {ind}");
    // Comonotone pair: c(F⁻¹(U), G⁻¹(U)) = (1 + Z)², so σ² = Var(Z² + 2Z) = 6.
    assert!(rel(co, 6.0) < 1e-3, "{co}");
}

#[test]
fn independent_variance_splits_into_one_sample_parts() {
    let q = QuadratureConfig::for_variance();
    let (f, g) = (Distribution::Weibull { shape: 2.0 }, n(0.5, 1.5));
    for c in [W2, CostFunction::Power { alpha: 3.0 }] {
        let both = sigma2(&f, &g, &c, &Coupling::Independent, &q).unwrap().value;
        let x = sigma2_one_sample(&f, &g, &c, Side::X, &q).unwrap().value;
        let y = sigma2_one_sample(&f, &g, &c, Side::Y, &q).unwrap().value;
        assert!(rel(both, x + y) < 1e-5, "{c}: {both} vs {x} + {y}");
    }
}

#[test]
fn variance_is_nonnegative_and_degenerate_pairs_clamp_to_zero() {
    let q = QuadratureConfig::for_variance();
    let f = n(0.0, 1.0);
    for cp in [Coupling::Independent, Coupling::Comonotone, Coupling::Gaussian { r: 0.7 }] {
        let r = sigma2(&f, &f, &W2, &cp, &q).unwrap();
        assert!(r.value.abs() <= CLAMP_FLOOR, "{cp}: {}", r.value);
        assert!(r.diagnostics.clamped <= CLAMP_FLOOR);
        assert!(r.value >= 0.0);
        let g = n(0.3, 1.2);
        assert!(sigma2(&f, &g, &W2, &cp, &q).unwrap().value > 0.0);
    }
}

#[test]
fn scale_pareto_pair_is_finite_above_the_fourth_moment() {
    // X = 2Z, Y = Z with Z ~ Pareto(β), comonotone: c = Z², so σ² = Var(Z²).
    let q = QuadratureConfig::for_variance();
    let beta = 6.0;
    let z = Distribution::Pareto { shape: beta };
    let x = Distribution::LocationScale {
        base: Box::new(z.clone()),
        scale: 2.0,
        shift: 0.0,
    };
    let r = sigma2(&x, &z, &W2, &Coupling::Comonotone, &q).unwrap();
    let ez2 = beta / (beta - 2.0);
    let ez4 = beta / (beta - 4.0);
    assert!(rel(r.value, ez4 - ez2 * ez2) < 1e-3, "{}", r.value);
}

#[test]
fn location_scale_formula_reduces_to_the_gaussian_case() {
    // Unit-variance Gaussian base: V₄ = 2, so the formula reduces to the Gaussian one.
    let base = n(0.0, 1.0);
    let ls = sigma2_location_scale(&base, 1.0, 0.0, 2.0, 1.0).unwrap().value;
    assert!(rel(ls, 30.0) < 1e-6, "{ls}");
}

#[test]
fn plug_in_tracks_the_population_value() {
    let s = Coupling::Independent.sample_pairs(&n(0.0, 1.0), &n(1.0, 2.0), 10_000, 7).unwrap();
    let r = plug_in_sigma2(&s, &W2, None, None).unwrap();
    assert!(rel(r.value, 30.0) < 0.25, "{}", r.value);
    assert!(r.diagnostics.plug_in.is_some());
}

#[test]
fn confidence_interval_uses_the_normal_quantile() {
    let (lo, hi) = confidence_interval(2.0, 16.0, 400, 0.95).unwrap();
    let half = 1.959_963_984_540_054 * 0.2;
    assert!((lo - (2.0 - half)).abs() < 1e-12 && (hi - (2.0 + half)).abs() < 1e-12);
    let (lo, hi) = confidence_interval(0.0, 1.0, 1, 0.5).unwrap();
    assert!((hi - 0.674_489_750_196_081_7).abs() < 1e-12 && lo == -hi);
    assert!(confidence_interval(0.0, -1.0, 10, 0.9).is_err());
}
