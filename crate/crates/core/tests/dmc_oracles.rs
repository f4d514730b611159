mod common;

use rand::Rng;
use wiretap_bounds::bsc::bsc_approx;
use wiretap_bounds::dmc::{
    conditional_entropy_y_given_z, conditional_info_and_dispersion,
    conditional_info_and_dispersion_joint, dmwtc_expansion, expansion_from_report,
    mutual_info_and_dispersion, optimize_secrecy_capacity, semidet_expansion, WiretapSpec,
    WiretapTags,
};
use wiretap_bounds::probmodel::{DiscreteChannel, FiniteDist};

fn wtc(legit: DiscreteChannel, eve: DiscreteChannel, semi_deterministic: bool) -> WiretapSpec {
    WiretapSpec::new(
        legit,
        eve,
        WiretapTags {
            degraded: false,
            semi_deterministic,
        },
    )
    .unwrap()
}

fn point(p: &[f64]) -> FiniteDist {
    FiniteDist::from_weights(p).unwrap()
}

fn secrecy_gap(p: &FiniteDist, w: &WiretapSpec) -> f64 {
    mutual_info_and_dispersion(p, &w.legit).unwrap().0
        - mutual_info_and_dispersion(p, &w.eve).unwrap().0
}

fn simplex3(steps: usize) -> Vec<[f64; 3]> {
    let mut out = vec![];
    for i in 0..=steps {
        for j in 0..=steps - i {
            let (a, b) = (i as f64 / steps as f64, j as f64 / steps as f64);
            out.push([a, b, (1.0 - a - b).max(0.0)]);
        }
    }
    out
}

/// `Σ_x P(x) Σ_y W(y|x) (ι − D_x)²` in squared bits, with the centering done
/// inside the sum.
fn centered_variance(p: &[f64], w: &DiscreteChannel) -> f64 {
    let out: Vec<f64> = (0..w.output_size())
        .map(|y| (0..p.len()).map(|x| p[x] * w.prob(x, y)).sum())
        .collect();
    let mut v = 0.0;
    for (x, &px) in p.iter().enumerate().filter(|(_, px)| **px > 0.0) {
        let row = w.row(x).masses();
        let dens: Vec<f64> = row
            .iter()
            .zip(&out)
            .map(|(a, b)| if *a > 0.0 { (a / b).log2() } else { 0.0 })
            .collect();
        let d: f64 = row.iter().zip(&dens).map(|(a, i)| a * i).sum();
        v += px
            * row
                .iter()
                .zip(&dens)
                .map(|(a, i)| a * (i - d).powi(2))
                .sum::<f64>();
    }
    v
}

#[test]
fn optimizer_matches_a_binary_input_grid() {
    let mut rng = common::rng(51);
    for case in 0..10 {
        let w = wtc(
            common::channel(&mut rng, 2, 3, false),
            common::channel(&mut rng, 2, 3, false),
            false,
        );
        let r = optimize_secrecy_capacity(&w).unwrap();
        let (mut best, mut best_upper) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for i in 0..=20_000 {
            let t = i as f64 / 20_000.0;
            let p = point(&[t, 1.0 - t]);
            best = best.max(secrecy_gap(&p, &w));
            best_upper = best_upper.max(conditional_info_and_dispersion(&p, &w).unwrap().0);
        }
        assert!(
            r.c_s >= best - 1e-12 && r.c_s <= best + 1e-8,
            "case {case}: {} vs {best}",
            r.c_s
        );
        assert!(
            r.c_s_upper >= best_upper - 1e-12 && r.c_s_upper <= best_upper + 1e-8,
            "case {case}: {} vs {best_upper}",
            r.c_s_upper
        );
    }
}

#[test]
fn optimizer_matches_a_three_input_simplex_grid() {
    let mut rng = common::rng(52);
    // 141 steps per side give about 10⁴ grid points.
    let grid = simplex3(140);
    assert!(grid.len() >= 10_000);
    for case in 0..5 {
        // Physically degraded pair: eve sees the legitimate output through T.
        let legit = common::channel(&mut rng, 3, 3, false);
        let t = common::channel(&mut rng, 3, 3, false);
        let eve = compose(&legit, &t);
        let w = wtc(legit, eve, false);
        let r = optimize_secrecy_capacity(&w).unwrap();
        let best = grid
            .iter()
            .map(|p| secrecy_gap(&point(p), &w))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(
            r.c_s >= best - 1e-12,
            "case {case}: {} below grid {best}",
            r.c_s
        );
        assert!(
            r.c_s - best <= 1e-4,
            "case {case}: {} vs grid {best}",
            r.c_s
        );
    }
}

fn compose(a: &DiscreteChannel, b: &DiscreteChannel) -> DiscreteChannel {
    DiscreteChannel::new(
        (0..a.input_size())
            .map(|x| {
                (0..b.output_size())
                    .map(|z| {
                        (0..a.output_size())
                            .map(|y| a.prob(x, y) * b.prob(y, z))
                            .sum()
                    })
                    .collect()
            })
            .collect(),
    )
    .unwrap()
}

/// `P_{YZ|X}(y, z | x) = W(y|x) T(z|y)` flattened as `y * |Z| + z`.
fn degraded_joint(w: &DiscreteChannel, t: &DiscreteChannel) -> DiscreteChannel {
    DiscreteChannel::new(
        (0..w.input_size())
            .map(|x| {
                let mut r = vec![];
                for y in 0..w.output_size() {
                    for z in 0..t.output_size() {
                        r.push(w.prob(x, y) * t.prob(y, z));
                    }
                }
                r
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn degraded_chain_gives_the_information_difference() {
    let mut rng = common::rng(53);
    for _ in 0..50 {
        let legit = common::channel(&mut rng, 2, 2, false);
        let t = common::channel(&mut rng, 2, 2, false);
        let eve = compose(&legit, &t);
        let joint = degraded_joint(&legit, &t);
        let w = wtc(legit, eve, false);
        let p = common::dist(&mut rng, 2, false);
        let (i, v) = conditional_info_and_dispersion_joint(&p, &joint, 2).unwrap();
        assert!((i - secrecy_gap(&p, &w)).abs() <= 1e-10);
        assert!(v >= 0.0);
    }
}

#[test]
fn degraded_upper_bound_is_tight_under_the_chain_coupling() {
    let mut rng = common::rng(54);
    for case in 0..5 {
        let legit = common::channel(&mut rng, 2, 3, false);
        let t = common::channel(&mut rng, 3, 2, false);
        let joint = degraded_joint(&legit, &t);
        let w = wtc(legit.clone(), compose(&legit, &t), false);
        let r = optimize_secrecy_capacity(&w).unwrap();
        let upper = (0..=20_000)
            .map(|i| {
                let s = i as f64 / 20_000.0;
                conditional_info_and_dispersion_joint(&point(&[s, 1.0 - s]), &joint, 2)
                    .unwrap()
                    .0
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(
            (upper - r.c_s).abs() <= 1e-8,
            "case {case}: {upper} vs {}",
            r.c_s
        );
        // The default product coupling can only be looser.
        assert!(r.c_s_upper >= upper - 1e-9, "case {case}");
    }
}

fn random_semidet(rng: &mut impl Rng, nx: usize, ny: usize, nz: usize) -> WiretapSpec {
    // The first ny inputs cover every output, the rest land anywhere.
    let f: Vec<usize> = (0..nx)
        .map(|x| if x < ny { x } else { rng.random_range(0..ny) })
        .collect();
    let legit = DiscreteChannel::new(
        f.iter()
            .map(|&y| (0..ny).map(|j| if j == y { 1.0 } else { 0.0 }).collect())
            .collect(),
    )
    .unwrap();
    wtc(legit, common::channel(rng, nx, nz, false), true)
}

#[test]
fn conditional_information_is_the_conditional_entropy_when_semi_deterministic() {
    let mut rng = common::rng(55);
    for case in 0..200 {
        let nx = rng.random_range(2..=5);
        let ny = rng.random_range(2..=nx);
        let nz = rng.random_range(1..=4);
        let w = random_semidet(&mut rng, nx, ny, nz);
        let p = common::dist(&mut rng, nx, case % 3 == 0);
        let (i, _) = conditional_info_and_dispersion(&p, &w).unwrap();
        let h = conditional_entropy_y_given_z(&p, &w).unwrap();
        assert!((i - h).abs() <= 1e-10, "case {case}: {i} vs {h}");
    }
}

#[test]
fn dispersion_two_ways() {
    let mut rng = common::rng(56);
    for case in 0..300 {
        let nx = rng.random_range(1..=5);
        let ny = rng.random_range(1..=6);
        let ch = common::channel(&mut rng, nx, ny, case % 2 == 0);
        let p = common::dist(&mut rng, nx, case % 3 == 0);
        let (_, v) = mutual_info_and_dispersion(&p, &ch).unwrap();
        let want = centered_variance(p.masses(), &ch);
        assert!(v >= 0.0);
        assert!((v - want).abs() <= 1e-10, "case {case}: {v} vs {want}");
    }
}

#[test]
fn report_dispersions_are_nonnegative_and_ordered() {
    let mut rng = common::rng(57);
    for case in 0..8 {
        let w = wtc(
            common::channel(&mut rng, 3, 3, false),
            common::channel(&mut rng, 3, 2, false),
            false,
        );
        let r = optimize_secrecy_capacity(&w).unwrap();
        for v in [r.v1, r.v2, r.vc, r.v_legit] {
            assert!(v >= 0.0, "case {case}");
        }
        assert!(r.c_s <= r.c_s_upper + 1e-9, "case {case}");
        for n in [100u64, 1000, 10_000] {
            for (eps, delta) in [(1e-3, 1e-3), (0.05, 0.1), (0.2, 0.3)] {
                let e = expansion_from_report(&r, n, eps, delta).unwrap();
                let conv = e.conv.unwrap();
                assert!(e.ach <= conv, "case {case}, n {n}: {} > {conv}", e.ach);
            }
        }
    }
}

#[test]
fn semidet_expansion_reproduces_the_bsc_approximation() {
    for p in [0.05, 0.11, 0.3] {
        let w = WiretapSpec::bsc_wtc(p).unwrap();
        for n in [50u64, 400, 3000] {
            for (eps, delta) in [(0.0, 1e-3), (1e-3, 1e-3), (0.1, 0.2)] {
                let a = semidet_expansion(&w, n, eps, delta).unwrap().rate;
                let b = bsc_approx(p, n, eps, delta).unwrap();
                assert!((a - b).abs() <= 1e-9, "p {p}, n {n}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn semidet_expansion_grows_with_delta() {
    let mut rng = common::rng(58);
    let w = random_semidet(&mut rng, 4, 2, 3);
    let rates: Vec<f64> = [1e-6, 1e-4, 1e-2, 0.1, 0.3, 0.6]
        .iter()
        .map(|&d| semidet_expansion(&w, 500, 0.01, d).unwrap().rate)
        .collect();
    for r in rates.windows(2) {
        assert!(r[1] > r[0], "{rates:?}");
    }
}

#[test]
fn general_expansion_of_the_bsc_wiretap_channel() {
    // Noiseless link: C_S = H_b(p) with V = X as well.
    let p = 0.11;
    let b = WiretapSpec::bsc_wtc(p).unwrap();
    let w = wtc(b.legit.clone(), b.eve.clone(), false);
    let e = dmwtc_expansion(&w, 1000, 1e-3, 1e-3).unwrap();
    let hb = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
    assert!(e.ach < hb && e.conv.unwrap() < hb);
    assert!(e.ach <= e.conv.unwrap());
}
