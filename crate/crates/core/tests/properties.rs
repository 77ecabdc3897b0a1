use std::collections::{BTreeSet, HashSet};

use num_bigint::BigUint;
use proptest::prelude::*;

use faultring::fault::{build_complex, ring_of};
use faultring::mesh::bounding_box;
use faultring::paths::{
    avoid_count_det, avoid_count_dp, brute_force_avoid, lt, restriction, PathCounter, DEFAULT_ENUMERATION_CAP,
};
use faultring::reliability::{p_miss, AnalysisOptions, EnginePolicy};
use faultring::{Coord, FaultSpec, MeshShape};

fn shape_strategy(dims: std::ops::RangeInclusive<usize>, max_radix: usize) -> impl Strategy<Value = Vec<usize>> {
    dims.prop_flat_map(move |n| prop::collection::vec(2..=max_radix, n))
}

fn coord_in(radices: &[usize]) -> impl Strategy<Value = Coord> {
    radices.iter().map(|&r| 0..r).collect::<Vec<_>>().prop_map(Coord)
}

/// A mesh, two endpoints, and up to five candidate obstacles.
fn pair_case() -> impl Strategy<Value = (Vec<usize>, Coord, Coord, Vec<Coord>)> {
    shape_strategy(2..=3, 5).prop_flat_map(|r| {
        let pts = prop::collection::vec(coord_in(&r), 0..=5);
        (Just(r.clone()), coord_in(&r), coord_in(&r), pts)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn neighbors_are_symmetric(r in shape_strategy(1..=4, 5), seed in any::<usize>()) {
        let s = MeshShape::new(r).unwrap();
        let v = s.coord_of(seed % s.len());
        for w in s.neighbors(&v).unwrap() {
            prop_assert!(s.neighbors(&w).unwrap().contains(&v));
            prop_assert_eq!(v.manhattan(&w), 1);
        }
    }

    #[test]
    fn bounding_box_is_symmetric((r, a, b, _) in pair_case()) {
        let _ = r;
        prop_assert_eq!(bounding_box(&a, &b), bounding_box(&b, &a));
        prop_assert!(bounding_box(&a, &b).contains(&a));
        prop_assert!(bounding_box(&a, &b).contains(&b));
    }

    #[test]
    fn lt_is_symmetric_and_follows_pascal((_r, a, b, _) in pair_case()) {
        prop_assert_eq!(lt(&a, &b), lt(&b, &a));
        if a != b {
            // Paths from a to b split on their first step.
            let mut sum = BigUint::from(0u32);
            for i in 0..a.dims() {
                if a.0[i] != b.0[i] {
                    let mut next = a.clone();
                    if b.0[i] > a.0[i] { next.0[i] += 1 } else { next.0[i] -= 1 }
                    sum += lt(&next, &b);
                }
            }
            prop_assert_eq!(sum, lt(&a, &b));
        }
    }

    #[test]
    fn three_counters_agree((r, a, b, pts) in pair_case()) {
        let s = MeshShape::new(r).unwrap();
        let forbidden: HashSet<Coord> = pts.iter().filter(|p| **p != a && **p != b).cloned().collect();
        let set: BTreeSet<Coord> = forbidden.iter().cloned().collect();
        let rs = restriction(&s, &a, &b, &set).unwrap();
        let det = avoid_count_det(&a, &b, &rs.points).unwrap();
        let dp = avoid_count_dp(&s, &a, &b, &forbidden).unwrap();
        let brute = brute_force_avoid(&s, &a, &b, &forbidden, DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert_eq!(&det, &dp);
        prop_assert_eq!(&dp, &brute);
    }

    #[test]
    fn determinant_ignores_point_order((_r, a, b, pts) in pair_case(), rot in 0usize..5) {
        let mut pts: Vec<Coord> = pts.into_iter().filter(|p| *p != a && *p != b).collect();
        pts.sort();
        pts.dedup();
        let base = avoid_count_det(&a, &b, &pts).unwrap();
        if !pts.is_empty() {
            let k = rot % pts.len();
            pts.rotate_left(k);
            pts.reverse();
        }
        prop_assert_eq!(base, avoid_count_det(&a, &b, &pts).unwrap());
    }

    #[test]
    fn out_of_box_points_change_nothing((r, a, b, pts) in pair_case(), extra in prop::collection::vec(any::<usize>(), 1..4)) {
        let s = MeshShape::new(r).unwrap();
        let bx = bounding_box(&a, &b);
        let mut inside: Vec<Coord> = pts.into_iter().filter(|p| *p != a && *p != b && bx.contains(p)).collect();
        inside.sort();
        inside.dedup();
        let base = avoid_count_det(&a, &b, &inside).unwrap();
        let outside: BTreeSet<Coord> = extra.iter().map(|e| s.coord_of(e % s.len())).filter(|c| !bx.contains(c)).collect();
        let mut appended = inside.clone();
        appended.extend(outside);
        prop_assert_eq!(base, avoid_count_det(&a, &b, &appended).unwrap());
    }

    #[test]
    fn more_obstacles_never_add_paths((r, a, b, pts) in pair_case()) {
        let s = MeshShape::new(r).unwrap();
        let mut forbidden = HashSet::new();
        let mut prev = avoid_count_dp(&s, &a, &b, &forbidden).unwrap();
        for p in pts.into_iter().filter(|p| *p != a && *p != b) {
            forbidden.insert(p);
            let now = avoid_count_dp(&s, &a, &b, &forbidden).unwrap();
            prop_assert!(now <= prev);
            prev = now;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn interior_block_ring_size(r in shape_strategy(2..=3, 7), seed in any::<u64>()) {
        prop_assume!(r.iter().all(|&x| x >= 3));
        let mut origin = Vec::new();
        let mut extents = Vec::new();
        let mut x = seed;
        for &radix in &r {
            // keep the block off the border: 1 <= origin, origin + extent <= radix - 1
            let o = 1 + (x as usize) % (radix - 2);
            x /= 7;
            let e = 1 + (x as usize) % (radix - 1 - o);
            x /= 7;
            origin.push(o);
            extents.push(e);
        }
        let s = MeshShape::new(r).unwrap();
        let c = build_complex(&s, &FaultSpec::rect(Coord(origin), extents.clone())).unwrap();
        let expected: usize = extents.iter().map(|e| e + 2).product();
        prop_assert_eq!(c.obstacles.len(), expected);
        prop_assert_eq!(ring_of(&s, &c.faulty), c.ring.clone());
        // every healthy node at Chebyshev distance 1 is on the ring
        for v in s.nodes() {
            let near = c.faulty.iter().any(|f| f.chebyshev(&v) == 1);
            prop_assert_eq!(near && !c.faulty.contains(&v), c.ring.contains(&v));
        }
    }

    #[test]
    fn engines_agree_on_reliability(r in shape_strategy(2..=3, 5), seed in any::<u64>()) {
        let s = MeshShape::new(r.clone()).unwrap();
        let origin: Vec<usize> = r.iter().enumerate().map(|(i, &x)| ((seed >> (8 * i)) as usize) % x).collect();
        let extents: Vec<usize> = r.iter().zip(&origin).map(|(&x, &o)| 1 + ((seed >> 40) as usize) % (x - o).min(x - 1)).collect();
        let c = build_complex(&s, &FaultSpec::rect(Coord(origin), extents)).unwrap();
        let det = p_miss(&s, &c, &AnalysisOptions { engine: EnginePolicy::Determinant, ..Default::default() });
        let dp = p_miss(&s, &c, &AnalysisOptions { engine: EnginePolicy::Dp, ..Default::default() });
        match (det, dp) {
            (Ok(d), Ok(p)) => {
                prop_assert_eq!(&d.miss_paths, &p.miss_paths);
                prop_assert_eq!(&d.total_paths, &p.total_paths);
                prop_assert_eq!(d.p_hit.clone(), p.p_miss.complement());
            }
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            (a, b) => prop_assert!(false, "engines disagree: {:?} vs {:?}", a.map(|r| r.p_hit.to_string()), b.map(|r| r.p_hit.to_string())),
        }
    }
}

#[test]
fn pascal_table_matches_binomials() {
    let pc = PathCounter::new(30);
    for n in 1..=30 {
        for k in 1..n {
            assert_eq!(pc.binomial(n, k), pc.binomial(n - 1, k - 1) + pc.binomial(n - 1, k));
        }
    }
}

#[test]
fn direct_link_count_agrees_with_edge_enumeration() {
    for r in [vec![2], vec![5], vec![3, 4], vec![2, 2, 2], vec![3, 2, 4], vec![2, 3, 2, 2]] {
        let s = MeshShape::new(r).unwrap();
        let mut edges = 0usize;
        for v in s.nodes() {
            edges += s.neighbors(&v).unwrap().len();
        }
        assert_eq!(s.link_count_direct(), BigUint::from(edges / 2));
    }
}
