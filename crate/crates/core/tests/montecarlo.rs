use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use faultring::montecarlo::{mc_vs_exact, sample_minimal_path};
use faultring::paths::lt;
use faultring::reliability::AnalysisOptions;
use faultring::{build_complex, estimate_p_hit, Coord, FaultSpec, McConfig, MeshShape};

const SIGNIFICANCE: f64 = 0.001;
const DRAWS: usize = 100_000;

/// Chi-square p-value of path frequencies against the uniform law on all
/// `lt(a, b)` minimal paths.
fn uniformity_p_value(a: &Coord, b: &Coord, seed: u64) -> f64 {
    let k: usize = lt(a, b).try_into().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut freq: HashMap<Vec<Coord>, usize> = HashMap::new();
    for _ in 0..DRAWS {
        let path = sample_minimal_path(&mut rng, a, b);
        assert_eq!(path.first(), Some(a));
        assert_eq!(path.last(), Some(b));
        assert_eq!(path.len(), a.manhattan(b) + 1);
        *freq.entry(path).or_default() += 1;
    }
    assert_eq!(freq.len(), k, "every minimal path is reachable");
    let expected = DRAWS as f64 / k as f64;
    let stat: f64 = freq.values().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    1.0 - ChiSquared::new((k - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn sampler_is_uniform() {
    let cases = [
        (Coord::from([0, 0]), Coord::from([1, 1])),       // 2 paths
        (Coord::from([0, 0]), Coord::from([2, 2])),       // 6 paths
        (Coord::from([0, 0, 0]), Coord::from([3, 3, 0])), // 20 paths
        (Coord::from([3, 0, 2]), Coord::from([0, 1, 0])), // 60 paths, mixed directions
    ];
    for (i, (a, b)) in cases.iter().enumerate() {
        let p = uniformity_p_value(a, b, 100 + i as u64);
        assert!(p > SIGNIFICANCE, "{a} -> {b}: p = {p}");
    }
}

#[test]
fn straight_line_has_one_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let path = sample_minimal_path(&mut rng, &Coord::from([0, 0]), &Coord::from([0, 3]));
    assert_eq!(path, vec![Coord::from([0, 0]), Coord::from([0, 1]), Coord::from([0, 2]), Coord::from([0, 3])]);
}

#[test]
fn estimate_is_independent_of_worker_count() {
    let s = MeshShape::new(vec![7, 8, 11]).unwrap();
    let c = build_complex(&s, &FaultSpec::rect([2, 2, 2], [2, 1, 3])).unwrap();
    let run = |workers| estimate_p_hit(&s, &c, &McConfig { samples: 20_000, seed: 9, workers }).unwrap();
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(1));
    assert_ne!(one, estimate_p_hit(&s, &c, &McConfig { samples: 20_000, seed: 10, workers: 1 }).unwrap());
}

#[test]
fn fault_free_and_covered_meshes_are_exact() {
    let s = MeshShape::new(vec![4, 4]).unwrap();
    let free = faultring::FaultComplex::fault_free();
    let e = estimate_p_hit(&s, &free, &McConfig::new(2_000, 1)).unwrap();
    assert_eq!((e.p_hat, e.std_error), (0.0, 0.0));

    let s = MeshShape::new(vec![3, 2, 2]).unwrap();
    let c = build_complex(&s, &FaultSpec::rect([1, 1, 0], [1, 1, 1])).unwrap();
    let e = estimate_p_hit(&s, &c, &McConfig::new(2_000, 1)).unwrap();
    assert_eq!(e.p_hat, 1.0);
}

#[test]
fn agrees_with_exact_on_small_scenarios() {
    let cases: Vec<(Vec<usize>, FaultSpec)> = vec![
        (vec![6, 6], FaultSpec::rect([2, 2], [1, 2])),
        (vec![5, 7], FaultSpec::rect([0, 3], [2, 1])),
        (vec![4, 5, 6], FaultSpec::rect([1, 1, 2], [2, 2, 1])),
        (vec![5, 5, 5], FaultSpec::rect([2, 2, 2], [1, 1, 1])),
        (vec![3, 4, 3, 4], FaultSpec::rect([1, 1, 1, 1], [1, 1, 1, 2])),
    ];
    for (mesh, spec) in cases {
        let s = MeshShape::new(mesh.clone()).unwrap();
        let c = build_complex(&s, &spec).unwrap();
        let cmp = mc_vs_exact(&s, &c, &AnalysisOptions::default(), &McConfig::new(100_000, 7)).unwrap();
        assert!(cmp.agrees, "{mesh:?}: exact {} estimate {} ({} sigma)", cmp.exact, cmp.estimate.p_hat, cmp.sigmas);
    }
}
