use std::collections::{HashMap, VecDeque};

use hofer_core::geometry::SurfaceSpec;
use hofer_core::homology::{
    decompose_genus_g, decompose_punctured_torus, decompose_torus, gcd, l_a_bounds,
    simple_loops_genus0, word_length_genus0, Basis, H1Class,
};
use proptest::prelude::*;

/// Breadth-first distances from 0 in the Cayley graph of `Z^k` with the
/// nonzero signed indicator vectors as generators, inside `[-r, r]^k`.
fn bfs_lengths(k: usize, r: i64) -> HashMap<Vec<i64>, u64> {
    let gens: Vec<Vec<i64>> = (1..1u32 << k)
        .flat_map(|mask| {
            let v: Vec<i64> = (0..k).map(|j| ((mask >> j) & 1) as i64).collect();
            let w: Vec<i64> = v.iter().map(|x| -x).collect();
            [v, w]
        })
        .collect();
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(vec![0; k], 0);
    queue.push_back(vec![0; k]);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        for g in &gens {
            let w: Vec<i64> = v.iter().zip(g).map(|(a, b)| a + b).collect();
            if w.iter().all(|x| x.abs() <= r) && !dist.contains_key(&w) {
                dist.insert(w.clone(), d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

#[test]
fn word_length_matches_breadth_first_search() {
    for k in 1..=3 {
        // a wider box than the tested one so that shortest words fit
        let dist = bfs_lengths(k, 6);
        for (v, &d) in &dist {
            if v.iter().all(|x| x.abs() <= 3) {
                let got = word_length_genus0(&H1Class::genus0(v.clone())).unwrap();
                assert_eq!(got, d, "{v:?}");
            }
        }
        assert_eq!(
            dist.keys()
                .filter(|v| v.iter().all(|x| x.abs() <= 3))
                .count(),
            7usize.pow(k as u32)
        );
    }
}

fn norm(v: &[i64]) -> u64 {
    word_length_genus0(&H1Class::genus0(v.to_vec())).unwrap()
}

fn class_vec(k: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-20i64..20, k)
}

proptest! {
    #[test]
    fn norm_is_subadditive_and_homogeneous(
        (a, b) in (1usize..6).prop_flat_map(|k| (class_vec(k), class_vec(k))),
        n in -5i64..6,
    ) {
        let sum: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert!(norm(&sum) <= norm(&a) + norm(&b));
        let scaled: Vec<i64> = a.iter().map(|x| n * x).collect();
        prop_assert_eq!(norm(&scaled), n.unsigned_abs() * norm(&a));
    }

    #[test]
    fn simple_loops_realize_the_class(a in (1usize..6).prop_flat_map(class_vec)) {
        let loops = simple_loops_genus0(&H1Class::genus0(a.clone())).unwrap();
        prop_assert_eq!(loops.len() as u64, norm(&a));
        let mut sum = vec![0; a.len()];
        for (sign, set) in loops {
            prop_assert!(set.iter().any(|&x| x));
            for (s, inside) in sum.iter_mut().zip(set) {
                *s += sign * inside as i64;
            }
        }
        prop_assert_eq!(sum, a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn torus_parts_are_primitive(n in -50i64..50, m in -50i64..50) {
        let (p, q) = decompose_torus(&H1Class::torus(n, m)).unwrap();
        for part in [&p, &q] {
            let c = part.coefficients();
            prop_assert!(gcd(c[0], c[1]) <= 1);
        }
        prop_assert_eq!(p.coefficients()[0] + q.coefficients()[0], n);
        prop_assert_eq!(p.coefficients()[1] + q.coefficients()[1], m);
    }

    #[test]
    fn punctured_torus_parts_sum_to_input(c in (1usize..5).prop_flat_map(|k| prop::collection::vec(-9i64..9, k + 1))) {
        let k = c.len() - 1;
        let a = H1Class::new(Basis::PuncturedTorus { punctures: k }, c.clone()).unwrap();
        let (p, q) = decompose_punctured_torus(&a).unwrap();
        let sum: Vec<i64> = p.coefficients().iter().zip(q.coefficients()).map(|(x, y)| x + y).collect();
        prop_assert_eq!(sum, c);
        prop_assert_eq!(p.coefficients()[k], 1);
        prop_assert_eq!(q.coefficients()[0], 1);
    }

    #[test]
    fn genus_g_parts_sum_to_input(
        (blocks, c) in prop::collection::vec(1usize..4, 1..4).prop_flat_map(|b| {
            let rank: usize = b.iter().map(|k| k + 1).sum();
            (Just(b), prop::collection::vec(-9i64..9, rank))
        })
    ) {
        let a = H1Class::new(Basis::GenusG { blocks: blocks.clone() }, c.clone()).unwrap();
        let (p, q) = decompose_genus_g(&a).unwrap();
        let sum: Vec<i64> = p.coefficients().iter().zip(q.coefficients()).map(|(x, y)| x + y).collect();
        prop_assert_eq!(sum, c.clone());
        if blocks.len() == 1 {
            let single = H1Class::new(Basis::PuncturedTorus { punctures: blocks[0] }, c).unwrap();
            let (p1, q1) = decompose_punctured_torus(&single).unwrap();
            prop_assert_eq!(p.coefficients(), p1.coefficients());
            prop_assert_eq!(q.coefficients(), q1.coefficients());
        }
    }
}

#[test]
fn zero_class_in_genus_g() {
    let a = H1Class::new(Basis::GenusG { blocks: vec![2, 1] }, vec![0; 5]).unwrap();
    let (p, q) = decompose_genus_g(&a).unwrap();
    assert_eq!(p.coefficients(), [-1, 0, 1, -1, 1]);
    assert_eq!(q.coefficients(), [1, 0, -1, 1, -1]);
}

fn surface_and_class() -> impl Strategy<Value = (SurfaceSpec, H1Class)> {
    (0u32..4, 0u32..5, 0.5..4.0f64).prop_flat_map(|(g, k, area)| {
        let k = if g == 0 { k.max(1) } else { k };
        let s = SurfaceSpec::new(g, k, area, vec![]).unwrap();
        let basis = Basis::for_surface(&s).unwrap();
        prop::collection::vec(-6i64..6, basis.rank())
            .prop_map(move |c| (s.clone(), H1Class::new(basis.clone(), c).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn bounds_are_ordered((s, a) in surface_and_class(), frac in 0.01..0.99f64) {
        let area_a = frac * s.area;
        let r = l_a_bounds(&s, area_a, &a, None).unwrap();
        prop_assert!(0.0 <= r.lower.value);
        prop_assert!(r.lower.value <= r.upper.value + 1e-12, "{r:?}");
        if !a.is_zero() {
            prop_assert!(r.lower.value >= area_a);
        }
    }
}
