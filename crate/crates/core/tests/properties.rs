use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gauss_cumulants::combinat::{bell, double_factorial_odd, enumerate_pairings, enumerate_set_partitions};
use gauss_cumulants::{
    eval_numeric, moment, moment_memoized, CovMatrix, CovSymbol, CumulantEngine, CumulantQuery, EngineConfig,
    Index, IndexList, MomentCache, Monomial, Poly,
};

// Wick sum written out directly over position pairings.
fn moment_by_pairings(ix: &[Index]) -> Poly {
    if ix.is_empty() {
        return Poly::one();
    }
    Poly::from_terms(enumerate_pairings(ix.len()).map(|p| {
        let f = p.pairs().iter().map(|&(a, b)| CovSymbol::new(ix[a], ix[b]));
        (Monomial::from_factors(f), BigInt::from(1))
    }))
}

// Cumulant of products as the sum over pairings of all positions whose
// pair graph connects every group. Independent of the partition formula.
fn cumulant_by_connected_pairings(groups: &[Vec<Index>]) -> Poly {
    let flat: Vec<Index> = groups.iter().flatten().copied().collect();
    let owner: Vec<usize> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, v)| std::iter::repeat_n(g, v.len()))
        .collect();
    if flat.len() % 2 == 1 {
        return Poly::zero();
    }
    let mut out = Poly::zero();
    for p in enumerate_pairings(flat.len()) {
        let mut parent: Vec<usize> = (0..groups.len()).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            parent[x] = r;
            r
        }
        for &(a, b) in p.pairs() {
            let (ra, rb) = (find(&mut parent, owner[a]), find(&mut parent, owner[b]));
            parent[ra] = rb;
        }
        let root = find(&mut parent, 0);
        if (0..groups.len()).all(|g| find(&mut parent, g) == root) {
            let f = p.pairs().iter().map(|&(a, b)| CovSymbol::new(flat[a], flat[b]));
            out.add_term(Monomial::from_factors(f), BigInt::from(1));
        }
    }
    out
}

fn query(groups: &[Vec<Index>]) -> CumulantQuery {
    let slices: Vec<&[Index]> = groups.iter().map(Vec::as_slice).collect();
    CumulantQuery::from_slices(&slices).unwrap()
}

#[test]
fn pairing_counts_up_to_twelve() {
    for n in (2..=12).step_by(2) {
        let all: Vec<_> = enumerate_pairings(n).collect();
        assert_eq!(all.len() as u128, double_factorial_odd(n), "n = {n}");
        let distinct: BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(distinct.len(), all.len());
        for p in &all {
            assert!(p.pairs().iter().all(|&(a, b)| a < b));
            assert!(p.pairs().windows(2).all(|w| w[0].0 < w[1].0));
        }
    }
}

#[test]
fn bell_counts_up_to_eight() {
    for len in 1..=8 {
        let all: Vec<_> = enumerate_set_partitions(len).collect();
        assert_eq!(all.len() as u128, bell(len), "len = {len}");
        for p in &all {
            let mut seen: Vec<usize> = p.blocks().iter().flatten().copied().collect();
            seen.sort_unstable();
            assert_eq!(seen, (0..len).collect::<Vec<_>>());
            assert!(p
                .blocks()
                .iter()
                .all(|b| !b.is_empty() && b.windows(2).all(|w| w[0] < w[1])));
            assert!(p.blocks().windows(2).all(|w| w[0][0] < w[1][0]));
        }
        let distinct: BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(distinct.len(), all.len());
    }
}

#[test]
fn distinct_index_moments_have_unit_coefficients() {
    let cache = MomentCache::new();
    for n in (2..=12u32).step_by(2) {
        let p = moment_memoized(&IndexList::new(1..=n).unwrap(), &cache);
        assert_eq!(p.term_count() as u128, double_factorial_odd(n as usize));
        assert!(p.terms().all(|(_, c)| *c == BigInt::from(1)));
    }
}

#[test]
fn memoized_matches_plain_on_random_multisets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cache = MomentCache::new();
    for _ in 0..100 {
        let len = rand::Rng::random_range(&mut rng, 0..=8);
        let ix: Vec<Index> = (0..len)
            .map(|_| rand::Rng::random_range(&mut rng, 1..=5))
            .collect();
        let ix = IndexList::new(ix).unwrap();
        assert_eq!(*moment_memoized(&ix, &cache), moment(&ix), "{ix}");
    }
}

#[test]
fn odd_orders_vanish() {
    let e = CumulantEngine::default();
    for groups in [
        vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]],
        vec![vec![1, 2, 3]],
        vec![vec![1], vec![1, 1]],
        vec![vec![2], vec![1, 3], vec![1, 3, 3, 4]],
    ] {
        assert!(e.cumulant(&query(&groups)).unwrap().is_zero());
    }
    assert!(moment(&IndexList::new([1, 1, 1]).unwrap()).is_zero());
}

#[test]
fn doublet_cumulants_match_connected_pairings() {
    let e = CumulantEngine::default();
    for k in 1..=4u32 {
        let groups: Vec<Vec<Index>> = (0..k).map(|j| vec![2 * j + 1, 2 * j + 2]).collect();
        assert_eq!(
            e.cumulant(&query(&groups)).unwrap(),
            cumulant_by_connected_pairings(&groups)
        );
    }
}

#[test]
fn eval_is_invariant_under_relabel_with_permuted_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let e = CumulantEngine::default();
    let p = e
        .cumulant(&query(&[vec![1, 2], vec![3], vec![4], vec![1, 3]]))
        .unwrap();
    for _ in 0..20 {
        let a: Vec<Vec<f64>> = (0..4)
            .map(|_| {
                (0..4)
                    .map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0))
                    .collect()
            })
            .collect();
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| (0..4).map(|k| a[i][k] * a[j][k]).sum()).collect())
            .collect();
        let cov = CovMatrix::from_rows(&rows).unwrap();
        let mut perm: Vec<usize> = (0..4).collect();
        perm.shuffle(&mut rng);
        // Variable i becomes perm[i]; the permuted matrix moves entries along.
        let mut moved = vec![vec![0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                moved[perm[i]][perm[j]] = rows[i][j];
            }
        }
        let moved = CovMatrix::from_rows(&moved).unwrap();
        let q = p.relabel(|i| Some(perm[i as usize - 1] as Index + 1)).unwrap();
        let (x, y) = (eval_numeric(&p, &cov).unwrap(), eval_numeric(&q, &moved).unwrap());
        assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{x} vs {y}");
    }
}

fn small_poly() -> impl Strategy<Value = Poly> {
    let symbol = (1u32..=4, 1u32..=4).prop_map(|(i, j)| CovSymbol::new(i, j));
    let term = (prop::collection::vec(symbol, 0..3), -5i64..=5);
    prop::collection::vec(term, 0..5).prop_map(|terms| {
        Poly::from_terms(
            terms
                .into_iter()
                .map(|(f, c)| (Monomial::from_factors(f), BigInt::from(c))),
        )
    })
}

fn index_multiset(max_len: usize) -> impl Strategy<Value = Vec<Index>> {
    prop::collection::vec(1u32..=5, 0..=max_len)
}

fn small_groups() -> impl Strategy<Value = Vec<Vec<Index>>> {
    prop::collection::vec(prop::collection::vec(1u32..=4, 1..=3), 1..=4)
        .prop_filter("total order at most 8", |g| {
            g.iter().map(Vec::len).sum::<usize>() <= 8
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws(a in small_poly(), b in small_poly(), c in small_poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!((&a + &a.scale(-1)).term_count(), 0);
    }

    #[test]
    fn relabel_by_permutation_is_a_homomorphism(a in small_poly(), b in small_poly(), perm in Just(vec![0u32, 1, 2, 3]).prop_shuffle()) {
        let map = |i: Index| Some(perm[i as usize - 1] + 1);
        prop_assert_eq!((&a * &b).relabel(map).unwrap(), &a.relabel(map).unwrap() * &b.relabel(map).unwrap());
        prop_assert_eq!((&a + &b).relabel(map).unwrap(), &a.relabel(map).unwrap() + &b.relabel(map).unwrap());
    }

    #[test]
    fn eval_is_linear(a in small_poly(), b in small_poly(), c in -4i64..=4) {
        let cov = CovMatrix::from_rows(&[
            vec![1.3, 0.2, -0.4, 0.1],
            vec![0.2, 0.9, 0.3, 0.0],
            vec![-0.4, 0.3, 1.1, 0.25],
            vec![0.1, 0.0, 0.25, 0.7],
        ]).unwrap();
        let ea = eval_numeric(&a, &cov).unwrap();
        let eb = eval_numeric(&b, &cov).unwrap();
        let sum = eval_numeric(&(&a + &b), &cov).unwrap();
        let scaled = eval_numeric(&a.scale(c), &cov).unwrap();
        let tol = |x: f64| 1e-9 * x.abs().max(1.0);
        prop_assert!((sum - (ea + eb)).abs() <= tol(sum));
        prop_assert!((scaled - c as f64 * ea).abs() <= tol(scaled));
    }

    #[test]
    fn moment_routes_agree(ix in index_multiset(8)) {
        let list = IndexList::new(ix.clone()).unwrap();
        let by_pairings = moment_by_pairings(&ix);
        prop_assert_eq!(&moment(&list), &by_pairings);
        prop_assert_eq!(&*moment_memoized(&list, &MomentCache::new()), &by_pairings);
    }

    #[test]
    fn moment_is_permutation_invariant(ix in index_multiset(8).prop_shuffle()) {
        let mut sorted = ix.clone();
        sorted.sort_unstable();
        // The positional route on the raw order must agree with the sorted list.
        prop_assert_eq!(moment_by_pairings(&ix), moment(&IndexList::new(sorted).unwrap()));
    }

    #[test]
    fn moment_relabel_consistency(ix in index_multiset(8), perm in Just(vec![3u32, 7, 1, 9, 4]).prop_shuffle()) {
        let sigma = |i: Index| Some(perm[i as usize - 1]);
        let image: Vec<Index> = ix.iter().map(|&i| sigma(i).unwrap()).collect();
        let direct = moment(&IndexList::new(image).unwrap());
        let relabeled = moment(&IndexList::new(ix).unwrap()).relabel(sigma).unwrap();
        prop_assert_eq!(direct, relabeled);
    }

    #[test]
    fn cumulant_matches_connected_pairings(groups in small_groups()) {
        let k = CumulantEngine::default().cumulant(&query(&groups)).unwrap();
        prop_assert_eq!(k, cumulant_by_connected_pairings(&groups));
    }

    #[test]
    fn cumulant_argument_order_invariance(groups in small_groups(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shuffled = groups.clone();
        shuffled.shuffle(&mut rng);
        for g in shuffled.iter_mut() {
            g.shuffle(&mut rng);
        }
        let e = CumulantEngine::default();
        prop_assert_eq!(e.cumulant(&query(&groups)).unwrap(), e.cumulant(&query(&shuffled)).unwrap());
    }

    #[test]
    fn pruning_does_not_change_results(groups in small_groups()) {
        let reference = CumulantEngine::new(EngineConfig { pruned: false, ..EngineConfig::default() });
        let q = query(&groups);
        prop_assert_eq!(CumulantEngine::default().cumulant(&q).unwrap(), reference.cumulant(&q).unwrap());
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let q = query(&[vec![3], vec![1, 3], vec![1, 3], vec![1, 2, 3], vec![1, 2, 3, 3]]);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| CumulantEngine::default().cumulant(&q).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one.to_string(), run(3).to_string());
}

#[test]
fn worked_query_matches_connected_pairings() {
    let groups = vec![vec![3], vec![1, 3], vec![1, 3], vec![1, 2, 3], vec![1, 2, 3, 3]];
    let k = CumulantEngine::default().cumulant(&query(&groups)).unwrap();
    assert_eq!(k, cumulant_by_connected_pairings(&groups));

    // Index multiplicities are 4, 2 and 6, so every standardized term has
    // even degree in each index; the 1960 term is C12 C13^3 C23.
    let term = |c: i64, f: &[(Index, Index)]| {
        (
            Monomial::from_factors(f.iter().map(|&(i, j)| CovSymbol::new(i, j))),
            BigInt::from(c),
        )
    };
    let want = Poly::from_terms([
        term(42, &[]),
        term(158, &[(1, 2), (1, 2)]),
        term(438, &[(1, 3), (1, 3)]),
        term(240, &[(2, 3), (2, 3)]),
        term(1784, &[(1, 2), (1, 3), (2, 3)]),
        term(1960, &[(1, 2), (1, 3), (1, 3), (1, 3), (2, 3)]),
        term(802, &[(1, 2), (1, 2), (1, 3), (1, 3)]),
        term(1616, &[(1, 3), (1, 3), (2, 3), (2, 3)]),
        term(240, &[(1, 3), (1, 3), (1, 3), (1, 3)]),
        term(400, &[(1, 3), (1, 3), (1, 3), (1, 3), (2, 3), (2, 3)]),
    ]);
    assert_eq!(k.substitute_diagonal_one(), want);
}
