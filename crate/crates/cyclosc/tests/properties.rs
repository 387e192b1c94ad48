//! Cross-module consistency checks: the independent verdict routes must
//! agree with each other and with direct simulation.

use cyclosc::ddesim::{integrate, Classification, HistorySpec};
use cyclosc::equilibrium::{solve_equilibrium, DEFAULT_TOL};
use cyclosc::linearization::reduce;
use cyclosc::netmodel::{load_preset, GeneSpec, NetworkSpec, Regulation, PRESET_NAMES};
use cyclosc::report::{analyze, parse_methods, Tolerances};
use cyclosc::stability::{
    nyquist_winding, phase_gain, test_analytic, worst_case_reduction, GeneBounds, Interval,
    LoopTransfer, Outcome, ParameterBounds, DEFAULT_SAMPLES, SCALAR_TOL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_negative_ring(rng: &mut ChaCha8Rng, n: usize) -> NetworkSpec {
    let a = 10f64.powf(rng.gen_range(-0.5..0.5));
    let b = 10f64.powf(rng.gen_range(-0.5..0.5));
    let mut regulation: Vec<Regulation> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                Regulation::Repress
            } else {
                Regulation::Activate
            }
        })
        .collect();
    if regulation
        .iter()
        .filter(|r| **r == Regulation::Repress)
        .count()
        % 2
        == 0
    {
        regulation[0] = match regulation[0] {
            Regulation::Repress => Regulation::Activate,
            Regulation::Activate => Regulation::Repress,
        };
    }
    NetworkSpec {
        nu: rng.gen_range(1.3..4.0),
        genes: (0..n)
            .map(|i| GeneSpec {
                a,
                b,
                c: 10f64.powf(rng.gen_range(-0.3..0.7)),
                beta: 10f64.powf(rng.gen_range(-0.3..0.7)),
                tau_r: rng.gen_range(0.0..1.5),
                tau_p: rng.gen_range(0.0..1.5),
                regulation: regulation[i],
                alpha0: 0.0,
                p0: 1.0,
            })
            .collect(),
    }
}

#[test]
fn winding_matches_the_analytic_verdict() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    let mut checked = 0;
    while checked < 120 {
        let n = *[1usize, 2, 3, 5].get(rng.gen_range(0..4)).unwrap();
        let spec = random_negative_ring(&mut rng, n);
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        let rm = reduce(&spec, &eq).unwrap();
        let verdict = test_analytic(&rm, SCALAR_TOL).unwrap();
        if !verdict.margin.is_finite() || verdict.margin.abs() <= 1e-3 {
            continue;
        }
        let lt = LoopTransfer::from_equilibrium(&spec, &eq);
        let winding = nyquist_winding(&lt, None, DEFAULT_SAMPLES).unwrap();
        assert_eq!(
            winding.winding > 0,
            verdict.outcome == Outcome::OscillationsGuaranteed,
            "margin {} vs winding {} on {spec:?}",
            verdict.margin,
            winding.winding
        );
        checked += 1;
    }
}

#[test]
fn boundary_sweep_is_strictly_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let q: f64 = rng.gen_range(0.05..=1.0);
        let tau: f64 = rng.gen_range(0.0..=4.0);
        let mut prev_gain = f64::MIN;
        let mut prev_phase = f64::MIN;
        for k in 0..400 {
            let w = 6.0 * k as f64 / 399.0;
            let (gain, phase) = phase_gain(q, tau, w).unwrap();
            assert!(gain > prev_gain || k == 0);
            assert!(phase > prev_phase || k == 0);
            prev_gain = gain;
            prev_phase = phase;
        }
    }
}

#[test]
fn all_methods_agree_on_every_preset() {
    let methods = parse_methods("all").unwrap();
    for name in PRESET_NAMES {
        let spec = load_preset(name).unwrap();
        let report = analyze(&spec, &methods, &Tolerances::default()).unwrap();
        let outcomes: Vec<Outcome> = report
            .verdicts
            .iter()
            .map(|v| v.outcome)
            .filter(|o| *o != Outcome::Inconclusive)
            .collect();
        assert!(!outcomes.is_empty(), "{name}: every method inconclusive");
        assert!(
            outcomes.windows(2).all(|w| w[0] == w[1]),
            "{name}: methods disagree: {:?}",
            report
                .verdicts
                .iter()
                .map(|v| (v.method, v.outcome))
                .collect::<Vec<_>>()
        );
    }
}

#[test]
fn simulation_confirms_the_preset_verdicts() {
    // Unstable presets oscillate from a 1%-perturbed equilibrium; stable
    // ones converge. Horizons are sized to each network's slow mode.
    let cases = [
        ("counterexample", 300.0, Classification::Oscillating),
        ("repressilator", 400.0, Classification::Oscillating),
        ("hes7_wild", 1500.0, Classification::Oscillating),
        ("example7_nodelay", 900.0, Classification::Converged),
        ("hes7_mutant", 6000.0, Classification::Converged),
    ];
    for (name, t_end, expected) in cases {
        let spec = load_preset(name).unwrap();
        let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
        let history = HistorySpec::perturbed_equilibrium(&eq, 0.01);
        let traj = integrate(&spec, &history, t_end, None).unwrap();
        assert_eq!(traj.classification, expected, "{name}");
    }
}

#[test]
fn certified_homogeneous_box_around_the_seven_gene_ring() {
    // A homogeneous variant of the seven-gene network (same synthesis
    // products, so the same equilibrium and gain) wrapped in a tight box.
    // The extreme-parameter reduction stays unstable, which certifies every
    // member; winding confirms on a random sample.
    let spec = load_preset("example7").unwrap();
    let eq = solve_equilibrium(&spec, DEFAULT_TOL).unwrap();
    let zeta_abs = eq.zeta[0].abs();
    let bounds = ParameterBounds {
        genes: (0..7)
            .map(|_| GeneBounds {
                a: Interval::around(1.2, 2e-4),
                b: Interval::around(4.8, 2e-4),
                c: Interval::around(1.92, 2e-4),
                beta: Interval::around(4.32, 2e-4),
                tau_r: Interval::new(0.30, 0.31),
                tau_p: Interval::new(0.21, 0.22),
                zeta_abs: Interval::around(zeta_abs, 1e-3),
            })
            .collect(),
    };
    let wc = worst_case_reduction(&bounds, &[Regulation::Repress; 7]).unwrap();
    let rm = wc.reduced_model();
    let verdict = test_analytic(&rm, SCALAR_TOL).unwrap();
    assert_eq!(
        verdict.outcome,
        Outcome::OscillationsGuaranteed,
        "margin {}",
        verdict.margin
    );

    let mut rng = ChaCha8Rng::seed_from_u64(0xFACE);
    for _ in 0..100 {
        let member = bounds.sample(&mut rng);
        let report = nyquist_winding(&member.loop_transfer(), None, DEFAULT_SAMPLES).unwrap();
        assert!(report.winding > 0);
    }
}
