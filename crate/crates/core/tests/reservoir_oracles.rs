mod oracles;

use nalgebra::{DMatrix, DVector};
use neuronav::reservoir::{fit_sequences, Drive, EpisodeDataset, EsnConfig, Reservoir};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn built_radius_matches_gelfand_estimate() {
    let cases = [(200, 0.1, 0.95, 1u64), (200, 0.1, 0.95, 2), (300, 0.1, 0.9, 3)];
    for (nodes, density, rho, seed) in cases {
        let config = EsnConfig {
            nodes,
            density,
            spectral_radius: rho,
            ..EsnConfig::default()
        };
        let r = Reservoir::init(&config, 3, seed).unwrap();
        let measured = oracles::gelfand_radius(&r.recurrent().to_dense(), 40);
        assert!(
            (measured - rho).abs() < 1e-6,
            "N={nodes} seed={seed}: measured {measured}, target {rho}"
        );
    }
}

#[test]
fn gelfand_oracle_on_known_spectra() {
    let rotation = DMatrix::from_row_slice(2, 2, &[0.0, -0.7, 0.7, 0.0]);
    assert!((oracles::gelfand_radius(&rotation, 40) - 0.7).abs() < 1e-9);
    // Non-normal: large off-diagonal, eigenvalues 0.5 and 0.3.
    let shear = DMatrix::from_row_slice(2, 2, &[0.5, 100.0, 0.0, 0.3]);
    assert!((oracles::gelfand_radius(&shear, 40) - 0.5).abs() < 1e-6);
}

#[test]
fn fading_memory_forgets_initial_state() {
    let config = EsnConfig {
        leak: 1.0,
        spectral_radius: 0.9,
        ..EsnConfig::default()
    };
    let r = Reservoir::init(&config, 4, 11).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut a = DVector::from_fn(r.nodes(), |_, _| rng.random_range(-1.0..1.0));
    let mut b = DVector::from_fn(r.nodes(), |_, _| rng.random_range(-1.0..1.0));
    let start = (&a - &b).norm();
    for _ in 0..200 {
        let u: Vec<f64> = (0..4).map(|_| rng.random()).collect();
        a = r.step(&a, &u).unwrap();
        b = r.step(&b, &u).unwrap();
    }
    let end = (&a - &b).norm();
    assert!(end < 1e-6, "distance {start} -> {end}");
}

#[test]
fn period_four_cycle_is_reproduced_autonomously() {
    let one_hot = |k: usize| {
        let mut v = vec![0.0; 4];
        v[k % 4] = 1.0;
        v
    };
    let series: Vec<Vec<f64>> = (0..200).map(one_hot).collect();
    let config = EsnConfig::default();
    let r = Reservoir::init(&config, 4, 5).unwrap();
    let data = EpisodeDataset::new(series, 0.2, config.washout).unwrap();
    let (readout, _) = fit_sequences(&r, std::slice::from_ref(&data), 1e-6).unwrap();

    let primer_len = 22;
    let primer = data.prefix(primer_len);
    let predicted = r
        .free_run(&readout, &primer, std::iter::empty::<Vec<f64>>(), 40, Drive::Autonomous)
        .unwrap();
    assert_eq!(predicted.len(), 40);
    for (k, y) in predicted.iter().enumerate() {
        assert_eq!(y.argmax().0, (primer_len + k) % 4, "step {k}: {y:?}");
    }
}

#[test]
fn teacher_forcing_consumes_the_continuation() {
    let series: Vec<Vec<f64>> = (0..60).map(|k| vec![(k as f64 * 0.3).sin() * 0.5 + 0.5]).collect();
    let config = EsnConfig {
        nodes: 50,
        ..EsnConfig::default()
    };
    let r = Reservoir::init(&config, 1, 8).unwrap();
    let data = EpisodeDataset::new(series.clone(), 0.2, config.washout).unwrap();
    let (readout, _) = fit_sequences(&r, std::slice::from_ref(&data), 1e-8).unwrap();
    let primer = data.prefix(30);
    let forced = r
        .free_run(&readout, &primer, series[30..].iter(), 20, Drive::TeacherForced)
        .unwrap();
    for (k, y) in forced.iter().enumerate() {
        assert!((y[0] - series[30 + k][0]).abs() < 0.05, "step {k}");
    }
    // Running out of teacher inputs is an error rather than a silent stop.
    assert!(r
        .free_run(&readout, &primer, series[30..32].iter(), 20, Drive::TeacherForced)
        .is_err());
}
