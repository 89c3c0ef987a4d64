//! Enumeration and counting checked against brute-force oracles that share no
//! code with the library routes.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;
use proptest::prelude::*;
use spectra_core::*;

type Pairs = BTreeSet<(usize, usize)>;

/// Every perfect matching of `1..=2j`, by pairing the smallest free level
/// with each other free level in turn.
fn all_matchings(j: usize) -> Vec<Pairs> {
    fn rec(free: &mut Vec<usize>, current: &mut Vec<(usize, usize)>, out: &mut Vec<Pairs>) {
        if free.is_empty() {
            out.push(current.iter().copied().collect());
            return;
        }
        let first = free.remove(0);
        for k in 0..free.len() {
            let other = free.remove(k);
            current.push((first, other));
            rec(free, current, out);
            current.pop();
            free.insert(k, other);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    rec(&mut (1..=2 * j).collect(), &mut Vec::new(), &mut out);
    out
}

fn crossing_free(p: &Pairs) -> bool {
    p.iter().all(|&(a, b)| {
        p.iter().all(|&(c, d)| !(a < c && c < b && b < d))
    })
}

fn mirrored(p: &Pairs, size: usize) -> Pairs {
    p.iter()
        .map(|&(a, b)| {
            let (x, y) = (size + 1 - a, size + 1 - b);
            (x.min(y), x.max(y))
        })
        .collect()
}

fn as_pairs(p: &MergerPattern) -> Pairs {
    p.pairs().collect()
}

/// Pascal's triangle row `n`.
fn pascal(n: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for _ in 0..n {
        let mut next = vec![BigUint::one(); row.len() + 1];
        for k in 1..row.len() {
            next[k] = &row[k - 1] + &row[k];
        }
        row = next;
    }
    row
}

/// `binomial(2j, j) - binomial(2j, j + 1)` via Pascal.
fn catalan_oracle(j: usize) -> BigUint {
    let row = pascal(2 * j);
    match row.get(j + 1) {
        Some(next) => &row[j] - next,
        None => row[j].clone(),
    }
}

fn central_oracle(j: usize) -> BigUint {
    pascal(j)[j / 2].clone()
}

#[test]
fn enumerations_match_brute_force() {
    for j in 1..=6 {
        let all = all_matchings(j);
        let nc: BTreeSet<Pairs> = all.iter().filter(|p| crossing_free(p)).cloned().collect();
        let sym: BTreeSet<Pairs> = nc
            .iter()
            .filter(|p| mirrored(p, 2 * j) == **p)
            .cloned()
            .collect();

        let got_nc = enumerate_noncrossing(j).unwrap();
        let got_sym = enumerate_symmetric(j).unwrap();
        assert_eq!(got_nc.len(), nc.len(), "J={j}");
        assert_eq!(got_sym.len(), sym.len(), "J={j}");
        assert_eq!(got_nc.iter().map(as_pairs).collect::<BTreeSet<_>>(), nc);
        assert_eq!(got_sym.iter().map(as_pairs).collect::<BTreeSet<_>>(), sym);

        for p in all.iter().map(|p| MergerPattern::from_pairs(p.iter().copied()).unwrap()) {
            let pairs = as_pairs(&p);
            assert_eq!(p.is_noncrossing(), crossing_free(&pairs), "{p}");
            assert_eq!(as_pairs(&p.reflect()), mirrored(&pairs, 2 * j), "{p}");
            assert_eq!(
                p.is_centrally_symmetric(),
                mirrored(&pairs, 2 * j) == pairs,
                "{p}"
            );
        }
    }
}

#[test]
fn enumeration_order_is_sorted_and_unique() {
    for j in 1..=8 {
        for list in [enumerate_noncrossing(j).unwrap(), enumerate_symmetric(j).unwrap()] {
            assert!(list.windows(2).all(|w| w[0] < w[1]), "J={j}");
            for w in list.windows(2) {
                let a: Vec<_> = w[0].pairs().collect();
                let b: Vec<_> = w[1].pairs().collect();
                assert!(a < b);
            }
        }
    }
}

#[test]
fn four_way_agreement_up_to_twelve() {
    let f = series_f(13);
    let g = series_g(13);
    for j in 0..=12 {
        let t = count_t_closed(j);
        let p = count_p_closed(j);
        assert_eq!(t.0, catalan_oracle(j), "J={j}");
        assert_eq!(p.0, central_oracle(j), "J={j}");
        assert_eq!(count_t_recurrence(j), t);
        assert_eq!(count_p_recurrence(j), p);
        assert_eq!(f.coefficients[j], t);
        assert_eq!(g.coefficients[j], p);
        if j >= 1 {
            let nc = enumerate_noncrossing(j).unwrap();
            assert_eq!(BigCount::from(nc.len() as u64), t, "J={j}");
            assert!(nc.iter().all(MergerPattern::is_noncrossing));
            let sym = enumerate_symmetric(j).unwrap();
            assert_eq!(BigCount::from(sym.len() as u64), p, "J={j}");
            let filtered: Vec<_> = nc.into_iter().filter(|q| q.is_centrally_symmetric()).collect();
            assert_eq!(filtered, sym, "J={j}");
        }
    }
}

#[test]
fn recurrence_and_closed_forms_to_two_hundred() {
    let mut table = CountTable::new();
    for j in 0..=200 {
        let t = table.t(j);
        let p = table.p(j);
        assert_eq!(t, count_t_closed(j), "T J={j}");
        assert_eq!(p, count_p_closed(j), "P J={j}");
        assert!(p <= t);
    }
    assert_eq!(table.t(200).0, catalan_oracle(200));
}

#[test]
fn series_agree_with_oracles_to_two_hundred() {
    let f = series_f(201);
    let g = series_g(201);
    assert_eq!(f.order(), 201);
    assert_eq!(g.order(), 201);
    for j in (0..=200).step_by(7).chain([200]) {
        assert_eq!(f.coefficients[j].0, catalan_oracle(j), "J={j}");
        assert_eq!(g.coefficients[j].0, central_oracle(j), "J={j}");
    }
}

#[test]
fn j3_catalog() {
    let want: Vec<MergerPattern> = ["{[1,6],[2,3],[4,5]}", "{[1,6],[2,5],[3,4]}", "{[1,2],[3,4],[5,6]}"]
        .iter()
        .map(|s| parse_symbol(s).unwrap())
        .collect();
    let got = enumerate_symmetric(3).unwrap();
    assert_eq!(
        got.iter().collect::<BTreeSet<_>>(),
        want.iter().collect::<BTreeSet<_>>()
    );
}

fn any_pattern() -> impl Strategy<Value = MergerPattern> {
    (1usize..=7).prop_flat_map(|j| {
        Just((1..=2 * j).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|order| {
                MergerPattern::from_pairs(order.chunks(2).map(|c| (c[0], c[1]))).unwrap()
            })
    })
}

fn noncrossing_pattern() -> impl Strategy<Value = MergerPattern> {
    (1usize..=8).prop_flat_map(|j| {
        let all = enumerate_noncrossing(j).unwrap();
        (0..all.len()).prop_map(move |k| all[k].clone())
    })
}

proptest! {
    #[test]
    fn reflect_is_an_involution(p in any_pattern()) {
        prop_assert_eq!(p.reflect().reflect(), p);
    }

    #[test]
    fn symbol_round_trip(p in any_pattern()) {
        let s = format_symbol(&p);
        prop_assert!(!s.contains(' '));
        prop_assert_eq!(parse_symbol(&s).unwrap(), p);
    }

    #[test]
    fn reflect_preserves_noncrossing(p in noncrossing_pattern()) {
        prop_assert!(p.reflect().is_noncrossing());
        prop_assert_eq!(p.reflect().is_centrally_symmetric(), p.is_centrally_symmetric());
    }

    #[test]
    fn parser_never_panics(s in "[\\[\\]{},0-9 ]{0,24}") {
        let _ = parse_symbol(&s);
    }
}

#[test]
fn round_trip_every_enumerated_pattern() {
    for j in 1..=8 {
        for p in enumerate_noncrossing(j).unwrap() {
            assert_eq!(parse_symbol(&format_symbol(&p)).unwrap(), p);
            assert!(p.reflect().is_noncrossing());
            assert_eq!(p.reflect().reflect(), p);
        }
    }
}
