use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectra_core::spectral::{witness_blocks, write_paths_csv, DEFAULT_GRID_STEPS};
use spectra_core::*;

fn pat(s: &str) -> MergerPattern {
    parse_symbol(s).unwrap()
}

fn classify_witness(p: &MergerPattern) -> ObservedPattern {
    let fam = build_witness(p).unwrap();
    let lambda_max = witness_lambda_max(p).unwrap();
    classify(&fam, lambda_max, DEFAULT_GRID_STEPS, &Tolerances::default()).unwrap()
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

fn rotated(fam: &MatrixFamily, q: &DMatrix<f64>, shift: f64) -> MatrixFamily {
    let n = fam.dimension();
    let a = q * fam.a() * q.transpose() + DMatrix::identity(n, n) * shift;
    let b = q * fam.b() * q.transpose();
    MatrixFamily::new(a, b, fam.symmetric_hint()).unwrap()
}

#[test]
fn symmetric_witnesses_round_trip() {
    for j in 1..=5 {
        for p in enumerate_symmetric(j).unwrap() {
            let observed = classify_witness(&p);
            assert_eq!(observed.pattern, p);
            assert_eq!(observed.events.len(), j);
            let blocks = witness_blocks(&p).unwrap();
            for e in &observed.events {
                let blk = blocks
                    .iter()
                    .find(|b| [b.pair.0, b.pair.1] == e.pair)
                    .unwrap();
                assert!((e.lambda_star - blk.lambda_star()).abs() <= 1e-6, "{p} {e:?}");
                assert!((e.value - blk.center).abs() <= 1e-6, "{p} {e:?}");
            }
            assert!(observed
                .events
                .windows(2)
                .all(|w| w[0].lambda_star <= w[1].lambda_star));
        }
    }
}

#[test]
fn nested_witness_merges_inside_out() {
    let observed = classify_witness(&pat("{[1,6],[2,5],[3,4]}"));
    let pairs: Vec<_> = observed.events.iter().map(|e| e.pair).collect();
    assert_eq!(pairs, vec![[3, 4], [2, 5], [1, 6]]);
    let l: Vec<_> = observed.events.iter().map(|e| e.lambda_star).collect();
    assert!(l[0] < l[1] && l[1] < l[2]);
}

#[test]
fn side_by_side_witness_merges_at_mirrored_values() {
    let observed = classify_witness(&pat("{[1,2],[3,4]}"));
    assert_eq!(observed.events.len(), 2);
    let (x, y) = (observed.events[0], observed.events[1]);
    assert!((x.lambda_star - y.lambda_star).abs() <= 1e-6);
    assert!((x.value + 1.0).abs() < 1e-6 && (y.value - 1.0).abs() < 1e-6);
    assert_eq!((x.pair, y.pair), ([1, 2], [3, 4]));
}

#[test]
fn three_separate_doublets_die_at_distinct_lambdas() {
    let p = pat("{[1,2],[3,4],[5,6]}");
    let fam = build_witness(&p).unwrap();
    let paths = track_paths(&fam, witness_lambda_max(&p).unwrap(), 1000, &Tolerances::default())
        .unwrap();
    let mut deaths: Vec<(usize, usize, f64)> = paths
        .iter()
        .filter_map(|p| p.death.map(|d| (p.path_id, d.partner, d.lambda_hi)))
        .filter(|(a, b, _)| a < b)
        .collect();
    deaths.sort_by_key(|x| x.0);
    assert_eq!(
        deaths.iter().map(|d| (d.0, d.1)).collect::<Vec<_>>(),
        vec![(1, 2), (3, 4), (5, 6)]
    );
    // mirror doublets share a merge time; the self-mirrored middle one does not
    assert!(deaths[1].2 > deaths[0].2);
    assert_eq!(deaths[0].2, deaths[2].2);
}

#[test]
fn rotated_witnesses_still_classify() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for j in 1..=4 {
        for p in enumerate_symmetric(j).unwrap() {
            let q = random_orthogonal(2 * j, &mut rng);
            let fam = rotated(&build_witness(&p).unwrap(), &q, rng.gen_range(-3.0..3.0));
            let lambda_max = witness_lambda_max(&p).unwrap();
            let observed = classify(&fam, lambda_max, 1000, &Tolerances::default()).unwrap();
            assert_eq!(observed.pattern, p);
        }
    }
}

#[test]
fn crossing_paths_keep_their_labels() {
    // Levels 1,3 and 2,4 merge pairwise; paths 2 and 3 cross on the way.
    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.5, 0.5, -0.5, 1.5]));
    let mut b = DMatrix::zeros(4, 4);
    b[(0, 1)] = 1.0;
    b[(1, 0)] = -1.0;
    b[(2, 3)] = 1.0;
    b[(3, 2)] = -1.0;
    let fam = MatrixFamily::new(a, b, false).unwrap();
    match classify(&fam, 1.25, 1000, &Tolerances::default()) {
        Err(SpectralError::CrossingPattern { symbol, events }) => {
            assert_eq!(symbol, "{[1,3],[2,4]}");
            assert_eq!(events.len(), 2);
        }
        other => panic!("expected a crossing pattern, got {other:?}"),
    }
}

/// 4x4 chain whose levels -3, -1, 1, 3 all shrink as sqrt(1 - lambda^2) and
/// meet together at lambda = 1.
fn fourfold_chain() -> MatrixFamily {
    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![-3.0, -1.0, 1.0, 3.0]));
    let mut b = DMatrix::zeros(4, 4);
    let r3 = 3f64.sqrt();
    for (k, g) in [r3, 2.0, r3].into_iter().enumerate() {
        b[(k, k + 1)] = g;
        b[(k + 1, k)] = -g;
    }
    MatrixFamily::new(a, b, false).unwrap()
}

#[test]
fn fourfold_chain_spectrum_is_as_expected() {
    let fam = fourfold_chain();
    let lambda: f64 = 0.6;
    let s = spectrum(&fam.at(lambda)).unwrap();
    let r = (1.0 - lambda * lambda).sqrt();
    for (z, want) in s.iter().zip([-3.0 * r, -r, r, 3.0 * r]) {
        assert!((z.re - want).abs() < 1e-10 && z.im.abs() < 1e-10, "{s:?}");
    }
}

#[test]
fn fourfold_coalescence_is_refused() {
    let fam = fourfold_chain();
    let result = classify(&fam, 1.5, 1000, &Tolerances::default());
    assert!(
        matches!(result, Err(SpectralError::DegenerateMerger { .. })),
        "{result:?}"
    );
}

#[test]
fn flagged_asymmetric_family_is_reported() {
    // {[1,2],[3,6],[4,5]} realized block by block, but flagged symmetric.
    let blocks = [(-2.0, 0.5, 4.0), (1.0, 1.5, 1.0), (1.0, 0.5, 4.0)];
    let n = 6;
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for (k, &(m, c, g)) in blocks.iter().enumerate() {
        a[(2 * k, 2 * k)] = m + c;
        a[(2 * k + 1, 2 * k + 1)] = m - c;
        b[(2 * k, 2 * k + 1)] = g;
        b[(2 * k + 1, 2 * k)] = -g;
    }
    let tol = Tolerances::default();
    let plain = MatrixFamily::new(a.clone(), b.clone(), false).unwrap();
    assert_eq!(
        classify(&plain, 2.0, 1000, &tol).unwrap().pattern,
        pat("{[1,2],[3,6],[4,5]}")
    );
    let flagged = MatrixFamily::new(a, b, true).unwrap();
    assert!(matches!(
        classify(&flagged, 2.0, 1000, &tol),
        Err(SpectralError::AsymmetricPattern { .. })
    ));
    assert!(!check_central_symmetry(&plain, &[0.0, 0.5], &tol).unwrap().symmetric);
}

#[test]
fn incomplete_sweep_names_survivors() {
    let p = pat("{[1,6],[2,5],[3,4]}");
    let fam = build_witness(&p).unwrap();
    // stops before the outer pair merges at lambda = 1
    match classify(&fam, 0.9, 500, &Tolerances::default()) {
        Err(SpectralError::IncompleteSweep { alive, .. }) => assert_eq!(alive, vec![1, 6]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn witness_families_are_centrally_symmetric() {
    let tol = Tolerances::default();
    for j in 1..=5 {
        for p in enumerate_symmetric(j).unwrap() {
            let fam = build_witness(&p).unwrap();
            let samples: Vec<f64> = (0..=40).map(|k| 0.0313 * k as f64).collect();
            let check = check_central_symmetry(&fam, &samples, &tol).unwrap();
            assert!(check.symmetric, "{p}: {check:?}");
            let start = spectrum(fam.a()).unwrap();
            for (x, y) in start.iter().zip(start.iter().rev()) {
                assert!((x.re + y.re).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn csv_paths_follow_closed_form() {
    let p = pat("{[1,2]}");
    let fam = build_witness(&p).unwrap();
    let blk = witness_blocks(&p).unwrap()[0];
    let paths = track_paths(&fam, 1.25, 100, &Tolerances::default()).unwrap();
    let mut buf = Vec::new();
    write_paths_csv(&paths, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let lambda: f64 = f[0].parse().unwrap();
        let re: f64 = f[2].parse().unwrap();
        let im: f64 = f[3].parse().unwrap();
        let disc = blk.half_width.powi(2) - (blk.coupling * lambda).powi(2);
        if disc > 1e-9 {
            let want = if f[1] == "1" { -disc.sqrt() } else { disc.sqrt() };
            assert!((re - want).abs() < 1e-9, "{line}");
            assert_eq!(im, 0.0);
        } else if disc < -1e-9 {
            assert!((im.abs() - (-disc).sqrt()).abs() < 1e-9, "{line}");
        }
    }
}

#[test]
fn nested_inner_pair_complexifies_first_in_csv() {
    let p = pat("{[1,6],[2,5],[3,4]}");
    let fam = build_witness(&p).unwrap();
    let paths = track_paths(&fam, witness_lambda_max(&p).unwrap(), 1000, &Tolerances::default())
        .unwrap();
    let first_complex = |id: usize| {
        paths[id - 1]
            .samples
            .iter()
            .find(|s| s.1.im != 0.0)
            .map(|s| s.0)
            .unwrap()
    };
    assert!(first_complex(3) < first_complex(2));
    assert!(first_complex(2) < first_complex(1));
    assert_eq!(first_complex(3), first_complex(4));
}

#[test]
fn tracking_is_deterministic() {
    let p = pat("{[1,8],[2,3],[4,5],[6,7]}");
    let fam = build_witness(&p).unwrap();
    let run = || {
        let paths = track_paths(&fam, 1.25, 300, &Tolerances::default()).unwrap();
        let mut buf = Vec::new();
        write_paths_csv(&paths, &mut buf).unwrap();
        buf
    };
    assert_eq!(run(), run());
}

#[test]
fn conjugates_and_trace_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.gen_range(1..=12);
        let h = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
        let s = spectrum(&h).unwrap();
        assert_eq!(s.len(), n);
        let sum: Complex64 = s.iter().sum();
        assert!((sum.re - h.trace()).abs() < 1e-8 * (1.0 + h.trace().abs()));
        assert!(sum.im.abs() < 1e-12);
        for z in s.iter().filter(|z| z.im != 0.0) {
            assert!(s.iter().any(|w| (w - z.conj()).norm() <= 1e-9 * (1.0 + z.norm())));
        }
        assert!(s
            .windows(2)
            .all(|w| (w[0].re, w[0].im) <= (w[1].re, w[1].im)));
    }
}
