use mulimit::symbolic::{count_occurrences, set_density, window_density, Alphabet, CyclicWindow, Word};
use num_rational::Ratio;
use proptest::prelude::*;

fn naive_count(u: &[u8], v: &[u8]) -> usize {
    if v.len() > u.len() {
        return 0;
    }
    (0..=u.len() - v.len()).filter(|&i| &u[i..i + v.len()] == v).count()
}

fn naive_cyclic(c: &[u8], v: &[u8]) -> usize {
    (0..c.len()).filter(|&i| (0..v.len()).all(|j| c[(i + j) % c.len()] == v[j])).count()
}

fn all_words(q: u8, len: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w: Vec<u8>| {
                (0..q).map(move |s| {
                    let mut w = w.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    out.into_iter().map(Word::from_symbols).collect()
}

proptest! {
    #[test]
    fn occurrences_match_naive(u in prop::collection::vec(0u8..3, 0..40), v in prop::collection::vec(0u8..3, 1..4)) {
        prop_assume!(v.len() <= u.len());
        let got = count_occurrences(&Word::from_symbols(u.clone()), &Word::from_symbols(v.clone())).unwrap();
        prop_assert_eq!(got, naive_count(&u, &v));
    }

    #[test]
    fn cyclic_count_matches_naive(c in prop::collection::vec(0u8..3, 1..40), v in prop::collection::vec(0u8..3, 1..4)) {
        prop_assume!(v.len() <= c.len());
        let w = CyclicWindow::new(c.clone()).unwrap();
        prop_assert_eq!(w.cyclic_count(&v), naive_cyclic(&c, &v));
    }

    #[test]
    fn density_is_shift_invariant(c in prop::collection::vec(0u8..2, 1..50), v in prop::collection::vec(0u8..2, 1..4), k in 0usize..60) {
        prop_assume!(v.len() <= c.len());
        let w = CyclicWindow::new(c).unwrap();
        let v = Word::from_symbols(v);
        prop_assert_eq!(window_density(&w, &v).unwrap(), window_density(&w.rotated(k), &v).unwrap());
    }

    #[test]
    fn densities_of_all_words_sum_to_one(c in prop::collection::vec(0u8..3, 3..40), len in 1usize..3) {
        let w = CyclicWindow::new(c).unwrap();
        let words = all_words(3, len);
        prop_assert_eq!(set_density(&w, words.iter()).unwrap(), Ratio::from_integer(1));
    }

    #[test]
    fn extension_additivity(c in prop::collection::vec(0u8..2, 4..40), v in prop::collection::vec(0u8..2, 1..3)) {
        let w = CyclicWindow::new(c).unwrap();
        let base = window_density(&w, &Word::from_symbols(v.clone())).unwrap();
        let ext: Vec<Word> = (0..2).map(|s| { let mut x = v.clone(); x.push(s); Word::from_symbols(x) }).collect();
        prop_assert_eq!(set_density(&w, ext.iter()).unwrap(), base);
    }

    #[test]
    fn render_round_trip(s in "[ab.]{0,30}") {
        let a = Alphabet::new(['a', 'b', '.']).unwrap();
        let w = a.word(&s).unwrap();
        prop_assert_eq!(a.render(w.symbols()), s);
    }
}
