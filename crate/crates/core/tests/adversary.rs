use num_traits::{One, Zero};

use twoshare::adversary::{
    exponent_fit, logsum_bound_check, monte_carlo_attack, optimal_attack_x, optimal_attack_y,
    second_kind_error, Target, TestQuantities,
};
use twoshare::blockwise::{exact_quantities, BlockShare, BlockwiseParams};
use twoshare::prob::rational::{ratio, to_f64, RationalJoint};
use twoshare::prob::Pmf;
use twoshare::rng::RandomStream;
use twoshare::symbolwise::{ModularScheme, SymbolwiseCodec};

fn gamma_n(n: usize) -> f64 {
    (n as f64).powf(-1.0 / 3.0)
}

fn skewed() -> Pmf {
    Pmf::new(vec![0.7, 0.3]).unwrap()
}

/// Uniform binary source, n = 4, ell = 0.5: L = 4 and all 16 sequences are
/// typical, so M = 16 and shares live in 4 x 17 = 68 values.
fn uniform_n4() -> BlockwiseParams {
    BlockwiseParams::new(&Pmf::uniform(2), 4, 0.5, gamma_n(4)).unwrap()
}

#[test]
fn uniform_n4_attack_and_test_errors() {
    let p = uniform_n4();
    assert_eq!((p.l_n(), p.m_n()), (4, 16));
    let q = exact_quantities(&p).unwrap();
    let model = q.attack_model(&p);
    let ax = optimal_attack_x(&model).unwrap();
    let ay = optimal_attack_y(&model).unwrap();
    assert!((ax.success_prob - 16.0 / 68.0).abs() < 1e-15);
    assert!((ay.success_prob - 16.0 / 68.0).abs() < 1e-15);
    assert!(ax.success_prob <= 0.25);
    assert_eq!(q.alpha, 0.0);
    assert!((second_kind_error(&model).unwrap() - 16.0 / 68.0).abs() < 1e-15);
}

#[test]
fn logsum_tight_case_on_exact_rationals() {
    // (X, Y) joint by enumerating every secret and key
    let (l, mm) = (4usize, 17usize);
    let size = l * mm;
    let mut probs = vec![ratio(0, 1); size * size];
    let w = ratio(1, (16 * l * mm) as i64);
    for z in 0..16 {
        for ul in 0..l {
            for um in 0..mm {
                let x = ul * mm + (z + mm - um) % mm;
                let y = ul * mm + um;
                probs[x * size + y] += &w;
            }
        }
    }
    let joint = RationalJoint::new(vec![size, size], probs).unwrap();
    let region = |x: usize, y: usize| x / mm == y / mm && (x % mm + y % mm) % mm != mm - 1;
    let (alpha, beta) = joint.test_errors(region);
    assert!(alpha.is_zero());
    assert_eq!(beta, ratio(16, 68));
    // every information density equals 1/beta, so the log-sum step is an
    // equality: I = -log2 beta = log2(17/4)
    let ratios = joint.information_density_ratios();
    assert_eq!(ratios.len(), 1);
    assert_eq!(
        ratios.iter().next().unwrap() * &beta,
        num_rational::BigRational::one()
    );
    let i = joint.mutual_information();
    // float summation over 1088 support points
    assert!((i - (17.0f64 / 4.0).log2()).abs() < 1e-13);
    assert!((i - 2.087_462_841_250_339_4).abs() < 1e-13);
    let check = logsum_bound_check(
        i,
        TestQuantities {
            alpha: 0.0,
            beta: to_f64(&beta),
        },
    );
    assert!(check.holds);
    assert!((check.lhs - check.rhs).abs() < 1e-12);
    // the library's float path gives the same total
    let q = exact_quantities(&uniform_n4()).unwrap();
    assert!((q.i_xy - i).abs() < 1e-12);
}

#[test]
fn symbolwise_logsum_holds_exactly_at_n8() {
    let codec =
        SymbolwiseCodec::new(ModularScheme::new(3, 2).unwrap(), skewed(), 8, gamma_n(8)).unwrap();
    let q = codec.exact_quantities().unwrap();
    let beta = second_kind_error(&codec.fstar_attack_model()).unwrap();
    let check = logsum_bound_check(
        8.0 * q.i_xy_per_symbol,
        TestQuantities {
            alpha: q.alpha,
            beta,
        },
    );
    assert!(check.holds && !check.vacuous, "{check:?}");
    assert!(check.lhs > check.rhs);
}

#[test]
fn ideal_modular_scheme_is_always_fooled() {
    // M = |S| with a uniform source: ell = 0, every pair scores 0 > -gamma
    let codec =
        SymbolwiseCodec::new(ModularScheme::new(2, 2).unwrap(), Pmf::uniform(2), 6, 0.3).unwrap();
    let p = optimal_attack_x(&codec.attack_model())
        .unwrap()
        .success_prob;
    assert!((p - 1.0).abs() < 1e-12);
}

#[test]
fn attacks_are_symmetric() {
    for n in [4, 8] {
        let p = BlockwiseParams::new(&skewed(), n, 0.5, gamma_n(n)).unwrap();
        let q = exact_quantities(&p).unwrap();
        let m = q.attack_model(&p);
        let (x, y) = (optimal_attack_x(&m).unwrap(), optimal_attack_y(&m).unwrap());
        assert!((x.success_prob - y.success_prob).abs() < 1e-15);
    }
    for n in [4, 6] {
        let codec =
            SymbolwiseCodec::new(ModularScheme::new(3, 2).unwrap(), skewed(), n, gamma_n(n))
                .unwrap();
        let m = codec.attack_model();
        let (x, y) = (optimal_attack_x(&m).unwrap(), optimal_attack_y(&m).unwrap());
        assert!((x.success_prob - y.success_prob).abs() < 1e-12);
    }
}

/// `|estimate - p| <= 4 sigma`; a fixed-seed 95% interval would miss one
/// seed in twenty.
fn within_four_sigma(estimate: f64, p: f64, trials: u64) -> bool {
    (estimate - p).abs() <= 4.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

#[test]
fn monte_carlo_matches_exact_attack() {
    let p = BlockwiseParams::new(&skewed(), 8, 0.5, gamma_n(8)).unwrap();
    let q = exact_quantities(&p).unwrap();
    let exact = optimal_attack_x(&q.attack_model(&p)).unwrap();
    let best: BlockShare = exact.optimal_forgery.unwrap();
    let rng = RandomStream::new(21);
    let mc = monte_carlo_attack(&p, Target::X, |_| best, 1_000_000, &rng.substream(0));
    assert!(
        within_four_sigma(mc.success_prob, exact.success_prob, 1_000_000),
        "{mc:?}"
    );

    // a uniform forgery does as well here: every share has the same odds
    let uniform = monte_carlo_attack(
        &p,
        Target::Y,
        |r| BlockShare::new(r.below(p.l_n()), r.below(p.modulus())),
        1_000_000,
        &rng.substream(1),
    );
    let closed = 219.0 / (16.0 * 220.0);
    assert!(
        within_four_sigma(uniform.success_prob, closed, 1_000_000),
        "{uniform:?}"
    );
}

#[test]
fn blockwise_exponents_settle_on_ell_from_above() {
    // P^X = M/(L(M+1)) is a little below 1/L, so -(1/n) log2 P^X is a
    // little above ell and the gap shrinks with n
    let mut points = Vec::new();
    let mut prev_gap = f64::INFINITY;
    for n in [4, 8, 12, 16] {
        let p = BlockwiseParams::new(&skewed(), n, 0.5, gamma_n(n)).unwrap();
        let (l, m) = (p.l_n() as f64, p.m_n() as f64);
        let px = if n <= 12 {
            let q = exact_quantities(&p).unwrap();
            optimal_attack_x(&q.attack_model(&p)).unwrap().success_prob
        } else {
            m / (l * (m + 1.0))
        };
        let e = -px.log2() / n as f64;
        assert!(e > 0.5 && e - 0.5 < prev_gap, "n={n} exponent {e}");
        prev_gap = e - 0.5;
        points.push((n, px));
    }
    let fit = exponent_fit(&points).unwrap();
    assert!((fit.slope - 0.5).abs() < 0.03, "{fit:?}");
}

#[test]
fn forged_rejection_rate_meets_exponent() {
    // a forged sequence is rejected with probability >= 1 - 2^(-n(ell - gamma))
    for n in [8, 16] {
        let gamma = gamma_n(n);
        let codec =
            SymbolwiseCodec::new(ModularScheme::new(3, 2).unwrap(), skewed(), n, gamma).unwrap();
        let ell = codec.correlation_level();
        let accepted = codec.fstar_forgery_acceptance().unwrap();
        assert!(1.0 - accepted >= 1.0 - 2f64.powf(-(n as f64) * (ell - gamma)) - 1e-12);
    }
}
