//! Acceptance gate: one test per criterion, each printing a pass line with
//! its runtime (visible with --nocapture). Budgets are asserted, so run
//! these on an otherwise idle machine.

use std::sync::Arc;
use std::time::Instant;

use fractalab::checks::{
    check_adjacent_simplices_l1, check_coarea, check_lusin_holder, check_morrey,
    check_poincare, check_pseudo_poincare, check_truncation_bound,
    check_variation_comparison, CheckConfig, LabContext, MorreyLocus, PoincareLocus,
    PseudoMechanism, SuiteFunction,
};
use fractalab::functions::{
    make_test_function, maximal_function, variation, TestFunctionKind, VariationKind,
};
use fractalab::geometry::{
    build_spec, dist, separation_beta, LevelMesh, MeshBudget, Word,
};
use fractalab::spectral::{
    harmonic_extension, heat_asymptotics, heat_kernel, resolvable_window, semigroup_apply,
    spectral_decompose, EnergyForm, SpectralData,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mesh(name: &str, level: usize) -> Arc<LevelMesh> {
    let spec = Arc::new(build_spec(name).unwrap());
    Arc::new(LevelMesh::build(spec, level, 0, &MeshBudget::default()).unwrap())
}

fn done(n: usize, what: &str, start: Instant, budget_s: f64) {
    let elapsed = start.elapsed().as_secs_f64();
    println!("criterion {n:2} ({what}): PASS in {elapsed:.2}s (budget {budget_s}s)");
    assert!(
        elapsed < budget_s,
        "criterion {n} over budget: {elapsed:.2}s > {budget_s}s"
    );
}

#[test]
fn criterion_01_dimensions_and_resistance() {
    let start = Instant::now();
    let sg = build_spec("sg").unwrap();
    assert_eq!(sg.length_factor, 2.0);
    assert_eq!(sg.mass_factor, 3);
    assert!((sg.resistance_factor - 5.0 / 3.0).abs() < 1e-10);
    assert!((sg.d_h - 3f64.ln() / 2f64.ln()).abs() < 1e-12);
    assert!((sg.d_w - 5f64.ln() / 2f64.ln()).abs() < 1e-10);

    let vs = build_spec("vicsek").unwrap();
    assert_eq!(vs.length_factor, 3.0);
    assert_eq!(vs.mass_factor, 5);
    assert!((vs.resistance_factor - 3.0).abs() < 1e-10);
    assert!((vs.d_h - 5f64.ln() / 3f64.ln()).abs() < 1e-12);
    assert!((vs.d_w - 15f64.ln() / 3f64.ln()).abs() < 1e-10);
    done(1, "dimensions and resistance", start, 1.0);
}

#[test]
fn criterion_02_exact_geometry() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for name in ["sg", "vicsek"] {
        let m = mesh(name, 4);
        let spec = &m.spec;
        let mf = spec.mass_factor as f64;
        for _ in 0..50 {
            // Simplex measure at the mesh level.
            let s = rng.gen_range(0..m.simplices.len());
            let expected = mf.powi(-(m.level as i32));
            let got = m.simplices[s].measure;
            assert!((got - expected).abs() <= 1e-12 * expected.max(1.0));

            // Distance contraction of a random word map.
            let n = rng.gen_range(1..=4usize);
            let idx = rng.gen_range(0..spec.mass_factor.pow(n as u32));
            let word = Word::from_index(idx, spec.mass_factor, n);
            let a: Vec<f64> = (0..spec.dim).map(|_| rng.gen::<f64>()).collect();
            let b: Vec<f64> = (0..spec.dim).map(|_| rng.gen::<f64>()).collect();
            let fa = spec.apply_word(&word.0, &a);
            let fb = spec.apply_word(&word.0, &b);
            let expect = dist(&a, &b) * spec.length_factor.powi(-(n as i32));
            assert!((dist(&fa, &fb) - expect).abs() <= 1e-12 * expect.max(1.0));
        }
    }
    // Total mass M^t for plain and truncated meshes.
    for (name, level, trunc) in [("sg", 4, 0), ("vicsek", 3, 0), ("vicsek", 3, 2)] {
        let spec = Arc::new(build_spec(name).unwrap());
        let m = LevelMesh::build(spec, level, trunc, &MeshBudget::default()).unwrap();
        let total: f64 = m.weights.iter().sum();
        let expected = (m.spec.mass_factor as f64).powi(trunc as i32);
        assert!((total - expected).abs() <= 1e-12 * expected);
    }
    done(2, "exact geometry", start, 1.0);
}

fn decompose(name: &str, level: usize) -> (Arc<LevelMesh>, SpectralData) {
    let m = mesh(name, level);
    let sd = spectral_decompose(&EnergyForm::new(m.clone()), None).unwrap();
    (m, sd)
}

#[test]
fn criterion_03_heat_kernel_structure() {
    let start = Instant::now();
    for (name, level) in [("vicsek", 4usize), ("sg", 5usize)] {
        let (m, sd) = decompose(name, level);
        let (lo, hi) = resolvable_window(&sd);
        let t = (lo * hi).sqrt();
        let slice = heat_kernel(&sd, t).unwrap();
        let n = m.n_vertices();
        for x in 0..n {
            let mut mass = 0.0;
            for y in 0..n {
                let v = slice.values[[x, y]];
                // Symmetry and Markov positivity.
                assert!((v - slice.values[[y, x]]).abs() < 1e-8, "{name} asym at ({x},{y})");
                assert!(v >= -1e-10, "{name} negative kernel {v:.3e}");
                mass += v * m.weights[y];
            }
            // Conservation.
            assert!((mass - 1.0).abs() < 1e-8, "{name} row {x} mass {mass}");
        }
        // Semigroup property on a test function.
        let f = make_test_function(
            &m,
            &TestFunctionKind::RandomCellwise { m: 1, seed: 77 },
            None,
        )
        .unwrap();
        let once = semigroup_apply(&sd, &f, t).unwrap();
        let twice = semigroup_apply(&sd, &once, t).unwrap();
        let direct = semigroup_apply(&sd, &f, 2.0 * t).unwrap();
        for (a, b) in twice.values.iter().zip(&direct.values) {
            assert!((a - b).abs() < 1e-8, "{name} semigroup defect");
        }
    }
    done(3, "heat kernel structure", start, 30.0);
}

#[test]
fn criterion_04_walk_dimension_slope() {
    let mut spectra = Vec::new();
    for (name, level) in [("vicsek", 4usize), ("sg", 5usize)] {
        spectra.push((name, decompose(name, level)));
    }
    // The budget applies once the spectrum is available.
    let start = Instant::now();
    for (name, (m, sd)) in &spectra {
        let (lo, hi) = resolvable_window(sd);
        // Central log window; the extremes feel discreteness (below) and
        // saturation toward the mean (above).
        let grid: Vec<f64> = (0..8)
            .map(|i| lo * (hi / lo).powf(0.2 + 0.6 * i as f64 / 7.0))
            .collect();
        let x = (0..m.n_vertices() as u32)
            .find(|&id| m.incidence[id as usize].len() > 1)
            .unwrap();
        let g = make_test_function(
            m,
            &TestFunctionKind::RandomCellwise { m: 1, seed: 77 },
            None,
        )
        .unwrap();
        let ha = heat_asymptotics(sd, &grid, x, &g).unwrap();
        let expected = match *name {
            "vicsek" => -0.5946,
            _ => -0.6826,
        };
        assert!((ha.target_slope - expected).abs() < 1e-3);
        assert!(
            (ha.slope - ha.target_slope).abs() < 0.1,
            "{name}: slope {:.4} vs target {:.4}",
            ha.slope,
            ha.target_slope
        );
    }
    done(4, "walk-dimension slope", start, 10.0);
}

#[test]
fn criterion_05_harmonic_energy_invariance() {
    let start = Instant::now();
    let spec = Arc::new(build_spec("vicsek").unwrap());
    let bv = [1.0, 0.0, 0.5, 0.25];
    let mut energies = Vec::new();
    for level in 1..=5 {
        let m = Arc::new(
            LevelMesh::build(spec.clone(), level, 0, &MeshBudget::default()).unwrap(),
        );
        let f = harmonic_extension(&m, &bv).unwrap();
        energies.push(EnergyForm::new(m).energy(&f).unwrap());
    }
    let e0 = energies[0];
    for e in &energies {
        assert!(
            (e - e0).abs() <= 1e-8 * e0.abs(),
            "energy drift: {energies:?}"
        );
    }
    done(5, "harmonic energy invariance", start, 10.0);
}

/// Harmonic + random suite with the sharpness witness for the exponent fit.
fn poincare_suite(spec: &fractalab::geometry::FractalSpec, p: f64) -> Vec<SuiteFunction> {
    let mut bv = vec![0.0; spec.boundary_len()];
    bv[0] = 1.0;
    vec![
        SuiteFunction {
            id: "harmonic".into(),
            kind: TestFunctionKind::Harmonic {
                boundary_values: bv,
            },
        },
        SuiteFunction {
            id: "random-a".into(),
            kind: TestFunctionKind::RandomCellwise { m: 2, seed: 7 },
        },
        SuiteFunction {
            id: "witness-poincare".into(),
            kind: TestFunctionKind::DistancePower {
                s: spec.alpha(p) * spec.d_w,
            },
        },
    ]
}

#[test]
fn criterion_06_poincare_scale_invariance() {
    let start = Instant::now();
    for name in ["vicsek", "sg"] {
        let m = mesh(name, 6);
        for p in [1.25, 1.5, 2.0] {
            let mut cfg = CheckConfig::new(name, 6, p);
            cfg.coarse_levels = vec![1, 2, 3, 4];
            cfg.radius_levels = vec![2, 3];
            cfg.cells_per_level = 2;
            cfg.n_ball_centers = 2;
            cfg.with_spectral = false;
            cfg.suite = poincare_suite(&m.spec, p);
            let ctx = LabContext::with_mesh(cfg, m.clone()).unwrap();

            let simplex =
                check_poincare(&ctx, PoincareLocus::Simplex, VariationKind::KorevaarSchoen)
                    .unwrap();
            assert!(
                simplex.hard_failures.is_empty(),
                "{name} p={p}: {:?}",
                simplex.hard_failures
            );
            assert!(
                simplex.stability_factor <= 3.0,
                "{name} p={p}: simplex stability {:.2}",
                simplex.stability_factor
            );
            let fit = simplex.exponent_fit.expect("simplex fit");
            let target = m.spec.alpha(p) * m.spec.d_w + m.spec.d_h / p;
            assert!((fit.target - target).abs() < 1e-12);
            assert!(
                fit.pass,
                "{name} p={p}: slope {:.4} vs target {:.4}",
                fit.slope, fit.target
            );

            let ball =
                check_poincare(&ctx, PoincareLocus::Ball, VariationKind::KorevaarSchoen)
                    .unwrap();
            assert!(
                ball.hard_failures.is_empty(),
                "{name} p={p}: {:?}",
                ball.hard_failures
            );
            assert!(
                ball.stability_factor <= 3.0,
                "{name} p={p}: ball stability {:.2}",
                ball.stability_factor
            );
        }
    }
    done(6, "Poincare scale invariance", start, 120.0);
}

/// Piecewise-constant suite: the L1 checks integrate over the level-set
/// family, so functions with few distinct values keep that family small.
fn bv_suite() -> Vec<SuiteFunction> {
    vec![
        SuiteFunction {
            id: "indicator-a".into(),
            kind: TestFunctionKind::Indicator {
                m: 1,
                cells: vec![0],
            },
        },
        SuiteFunction {
            id: "indicator-b".into(),
            kind: TestFunctionKind::Indicator {
                m: 2,
                cells: vec![7, 12],
            },
        },
        SuiteFunction {
            id: "random-a".into(),
            kind: TestFunctionKind::RandomCellwise { m: 1, seed: 7 },
        },
        SuiteFunction {
            id: "random-b".into(),
            kind: TestFunctionKind::RandomCellwise { m: 2, seed: 8 },
        },
    ]
}

#[test]
fn criterion_07_l1_bv_suite() {
    let start = Instant::now();
    let m = mesh("vicsek", 5);

    let mut cfg = CheckConfig::new("vicsek", 5, 1.0);
    cfg.coarse_levels = vec![1, 2];
    cfg.with_spectral = false;
    cfg.suite = bv_suite();
    let ctx = LabContext::with_mesh(cfg, m.clone()).unwrap();

    let coarea = check_coarea(&ctx).unwrap();
    assert!(coarea.pass, "coarea: {:?}", coarea.hard_failures);

    let adjacent = check_adjacent_simplices_l1(&ctx).unwrap();
    assert!(
        adjacent.hard_failures.is_empty(),
        "{:?}",
        adjacent.hard_failures
    );
    assert!(
        adjacent.stability_factor <= 3.0,
        "adjacent stability {:.2}",
        adjacent.stability_factor
    );

    // Radius level 1 is excluded: there the enlarged comparison ball A r
    // already covers the whole set, which blunts its variation estimate and
    // inflates the coarsest-scale ratios.
    let mut cfg = CheckConfig::new("vicsek", 5, 1.0);
    cfg.radius_levels = vec![2, 3];
    cfg.with_spectral = false;
    let mut suite = bv_suite();
    suite.push(SuiteFunction {
        id: "witness-poincare".into(),
        kind: TestFunctionKind::DistancePower { s: m.spec.d_h },
    });
    cfg.suite = suite;
    let ctx = LabContext::with_mesh(cfg, m).unwrap();
    let ball =
        check_poincare(&ctx, PoincareLocus::Ball, VariationKind::KorevaarSchoen).unwrap();
    assert!(ball.hard_failures.is_empty(), "{:?}", ball.hard_failures);
    assert!(
        ball.stability_factor <= 3.0,
        "L1 ball stability {:.2}",
        ball.stability_factor
    );
    done(7, "L1/BV suite", start, 120.0);
}

fn twenty_function_suite() -> Vec<SuiteFunction> {
    let mut suite = Vec::new();
    for (i, bv) in [
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0, 1.0],
        vec![1.0, 0.5, 0.25, 0.0],
        vec![0.3, -0.7, 1.1, 0.0],
    ]
    .into_iter()
    .enumerate()
    {
        suite.push(SuiteFunction {
            id: format!("harmonic-{i}"),
            kind: TestFunctionKind::Harmonic {
                boundary_values: bv,
            },
        });
    }
    for (i, (m, cells)) in [
        (1usize, vec![0u32]),
        (1, vec![2]),
        (2, vec![0]),
        (2, vec![12, 13]),
    ]
    .into_iter()
    .enumerate()
    {
        suite.push(SuiteFunction {
            id: format!("indicator-{i}"),
            kind: TestFunctionKind::Indicator { m, cells },
        });
    }
    for (i, (m, seed)) in [(1usize, 1u64), (1, 2), (2, 3), (2, 4), (2, 5), (3, 6), (3, 7), (3, 8)]
        .into_iter()
        .enumerate()
    {
        suite.push(SuiteFunction {
            id: format!("random-{i}"),
            kind: TestFunctionKind::RandomCellwise { m, seed },
        });
    }
    for axis in 0..2usize {
        suite.push(SuiteFunction {
            id: format!("coordinate-{axis}"),
            kind: TestFunctionKind::Coordinate { axis },
        });
    }
    for (i, s) in [0.5, 1.0].into_iter().enumerate() {
        suite.push(SuiteFunction {
            id: format!("distpow-{i}"),
            kind: TestFunctionKind::DistancePower { s },
        });
    }
    suite
}

#[test]
fn criterion_08_truncation_bound() {
    let start = Instant::now();
    let m = mesh("vicsek", 4);
    let suite = twenty_function_suite();
    assert_eq!(suite.len(), 20);
    for p in [1.0, 1.5, 2.0] {
        let mut cfg = CheckConfig::new("vicsek", 4, p);
        cfg.with_spectral = false;
        cfg.suite = suite.clone();
        let ctx = LabContext::with_mesh(cfg, m.clone()).unwrap();
        let rep = check_truncation_bound(&ctx).unwrap();
        assert_eq!(rep.instances.len(), 20);
        assert!(rep.pass, "p={p}: {:?}", rep.hard_failures);
    }
    done(8, "truncation bound", start, 60.0);
}

#[test]
fn criterion_09_maximal_and_lusin() {
    let start = Instant::now();
    let m = mesh("vicsek", 5);
    let beta = separation_beta(&m.spec, &[1, 2]).unwrap().beta;
    let p = 2.0;
    let all: Vec<u32> = (0..m.n_vertices() as u32).collect();

    // Weak-Lp bound for the maximal field: sup_t t^p mu({g > t}) against
    // the p-th power of the global variation estimate, with the measured
    // constant stable across random functions.
    let mut constants = Vec::new();
    for i in 0..10u64 {
        let f = make_test_function(
            &m,
            &TestFunctionKind::RandomCellwise { m: 2, seed: 100 + i },
            None,
        )
        .unwrap();
        let g = maximal_function(&f, p, &[0, 2, 3], beta).unwrap();
        let var = variation(&f, &all, p, VariationKind::KorevaarSchoen, beta, 1)
            .unwrap()
            .estimate;
        assert!(var > 0.0, "degenerate variation for seed {}", 100 + i);

        // t^p mu({g > t}) is maximized just below each distinct value of g.
        let mut pairs: Vec<(f64, f64)> = g
            .values
            .iter()
            .zip(&m.weights)
            .map(|(&v, &w)| (v, w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut weak = 0.0_f64;
        let mut suffix = 0.0;
        for (v, w) in pairs.iter().rev() {
            suffix += w;
            if *v > 0.0 {
                weak = weak.max(v.powf(p) * suffix);
            }
        }
        constants.push(weak / var.powf(p));
    }
    let c_max = constants.iter().fold(0.0_f64, |a, &b| a.max(b));
    let c_min = constants.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    assert!(
        c_max / c_min <= 3.0,
        "weak-Lp constant spread {:.2} ({constants:?})",
        c_max / c_min
    );

    // Lusin-Hoelder pairs, including the zero-field hard assertion.
    let mut cfg = CheckConfig::new("vicsek", 5, p);
    cfg.radius_levels = vec![2, 3];
    cfg.with_spectral = false;
    let ctx = LabContext::with_mesh(cfg, m).unwrap();
    let rep = check_lusin_holder(&ctx).unwrap();
    assert!(rep.hard_failures.is_empty(), "{:?}", rep.hard_failures);
    assert!(
        rep.stability_factor <= 1.5,
        "pair-doubling growth {:.3}",
        rep.stability_factor
    );
    done(9, "maximal function and Lusin-Hoelder", start, 180.0);
}

#[test]
fn criterion_10_byte_identical_reports() {
    let start = Instant::now();
    let run = || {
        let mut cfg = CheckConfig::new("sg", 4, 1.5);
        cfg.cells_per_level = 2;
        cfg.n_pairs = 400;
        let c = LabContext::build(cfg).unwrap();
        let mut out = String::new();
        for rep in [
            check_poincare(&c, PoincareLocus::Simplex, VariationKind::KorevaarSchoen).unwrap(),
            check_poincare(&c, PoincareLocus::Ball, VariationKind::KorevaarSchoen).unwrap(),
            check_morrey(&c, MorreyLocus::Simplex).unwrap(),
            check_pseudo_poincare(&c, PseudoMechanism::Heat).unwrap(),
            check_coarea(&c).unwrap(),
            check_truncation_bound(&c).unwrap(),
            check_lusin_holder(&c).unwrap(),
            check_variation_comparison(&c).unwrap(),
        ] {
            out += &serde_json::to_string(&rep).unwrap();
            out.push('\n');
        }
        out
    };
    let first = run();
    let second = run();
    assert_eq!(first, second, "reports differ between identical runs");
    done(10, "byte-identical reports", start, 60.0);
}
