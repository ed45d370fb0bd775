//! Library results against brute-force oracles written independently of
//! the library's search code.

use std::collections::{BTreeMap, HashSet};

use circuit_prior::complexity::ComplexityOracle;
use circuit_prior::enumeration::{enumerate_circuits, reachable_functions, Catalog, DEFAULT_BUDGET};
use circuit_prior::prior::{mu_exact, NuFamily};
use circuit_prior::{BitString, Pattern};
use num_bigint::BigInt;
use num_rational::BigRational;

/// Every gate list with unordered operand pairs, in construction order.
fn gate_lists(inputs: usize, size: usize) -> Vec<Vec<(usize, usize)>> {
    let mut lists = vec![Vec::new()];
    for k in 0..size {
        let nodes = inputs + k;
        lists = lists
            .into_iter()
            .flat_map(|list: Vec<(usize, usize)>| {
                (0..nodes).flat_map(move |b| (0..=b).map(move |a| (a, b))).map(move |p| {
                    let mut l = list.clone();
                    l.push(p);
                    l
                })
            })
            .collect();
    }
    lists
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Least relabeled code over all gate orders that stay topological.
fn brute_canonical(inputs: usize, gates: &[(usize, usize)], output: usize, perms: &[Vec<usize>]) -> Vec<usize> {
    let g = gates.len();
    let mut best: Option<Vec<usize>> = None;
    for perm in perms {
        let relabel = |node: usize| if node < inputs { node } else { inputs + perm[node - inputs] };
        let mut placed = vec![(0, 0); g];
        for (k, &(a, b)) in gates.iter().enumerate() {
            let (x, y) = (relabel(a), relabel(b));
            placed[perm[k]] = (x.min(y), x.max(y));
        }
        if placed.iter().enumerate().any(|(pos, &(_, hi))| hi >= inputs + pos) {
            continue;
        }
        let mut code: Vec<usize> = placed.iter().flat_map(|&(a, b)| [a, b]).collect();
        code.push(relabel(output));
        if best.as_ref().is_none_or(|b| code < *b) {
            best = Some(code);
        }
    }
    best.expect("identity order is topological")
}

fn brute_class_count(inputs: usize, size: usize) -> usize {
    let perms = permutations(size);
    let mut seen = HashSet::new();
    for list in gate_lists(inputs, size) {
        for out in 0..inputs + size {
            seen.insert(brute_canonical(inputs, &list, out, &perms));
        }
    }
    seen.len()
}

fn node_words(inputs: usize, gates: &[(usize, usize)]) -> Vec<u64> {
    let n = 1usize << inputs;
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut words: Vec<u64> = (0..inputs)
        .map(|j| (0..n).filter(|i| i >> j & 1 == 1).fold(0u64, |w, i| w | 1 << i))
        .collect();
    for &(a, b) in gates {
        words.push(!(words[a] & words[b]) & mask);
    }
    words
}

/// Least size at which some node of some gate list computes each string.
fn brute_complexities(inputs: usize, max_size: usize) -> BTreeMap<u64, usize> {
    let mut best = BTreeMap::new();
    for size in 0..=max_size {
        for list in gate_lists(inputs, size) {
            for w in node_words(inputs, &list) {
                best.entry(w).or_insert(size);
            }
        }
    }
    best
}

#[test]
fn class_counts_match_permutation_oracle() {
    for (l, g_max) in [(1u8, 4usize), (2, 4), (3, 3)] {
        for g in 0..=g_max {
            let lib = enumerate_circuits(l, g, DEFAULT_BUDGET).unwrap();
            assert!(!lib.truncated());
            assert_eq!(lib.len(), brute_class_count(l as usize, g), "L={l} g={g}");
        }
    }
}

#[test]
fn class_counts_frozen() {
    let expected: [(u8, &[usize]); 3] =
        [(1, &[1, 2, 8, 47, 365]), (2, &[2, 9, 57, 461, 4632, 56289]), (3, &[3, 24, 219, 2334, 29280])];
    for (l, counts) in expected {
        for (g, &c) in counts.iter().enumerate() {
            assert_eq!(enumerate_circuits(l, g, DEFAULT_BUDGET).unwrap().len(), c, "L={l} g={g}");
        }
    }
}

#[test]
fn enumeration_has_no_duplicate_classes() {
    for g in 0..=4 {
        let classes = enumerate_circuits(2, g, DEFAULT_BUDGET).unwrap();
        let forms: HashSet<String> = classes.iter().map(|c| c.canonicalize().to_string()).collect();
        assert_eq!(forms.len(), classes.len(), "g={g}");
        assert!(classes.iter().all(|c| c.is_canonical()));
    }
}

#[test]
fn complexity_table_matches_brute_force() {
    let brute = brute_complexities(2, 5);
    assert_eq!(brute.len(), 16);
    let oracle = ComplexityOracle::new(2, 6).unwrap();
    for s in BitString::all(2) {
        let r = oracle.complexity(&s.to_pattern()).unwrap();
        assert_eq!(r.value(), Some(brute[&s.word()]), "{s}");
        let w = r.witness().unwrap();
        assert_eq!(w.size(), brute[&s.word()]);
        assert_eq!(w.compute_string(), s);
    }
}

#[test]
fn complexity_table_frozen() {
    let expected = [
        ("0000", 3),
        ("0001", 2),
        ("0010", 3),
        ("0011", 0),
        ("0100", 3),
        ("0101", 0),
        ("0110", 4),
        ("0111", 3),
        ("1000", 4),
        ("1001", 5),
        ("1010", 1),
        ("1011", 2),
        ("1100", 1),
        ("1101", 2),
        ("1110", 1),
        ("1111", 2),
    ];
    let oracle = ComplexityOracle::new(2, 6).unwrap();
    for (s, i) in expected {
        assert_eq!(oracle.value(&Pattern::parse(s).unwrap()).unwrap(), Some(i), "{s}");
    }
}

#[test]
fn l3_complexities_match_brute_force_up_to_three_gates() {
    let brute = brute_complexities(3, 3);
    let table = reachable_functions(3, 3).unwrap();
    assert_eq!(table.len(), brute.len());
    for (s, g) in table.iter() {
        assert_eq!(brute.get(&s.word()), Some(&g), "{s}");
    }
}

#[test]
fn reachable_minima_are_stable_under_larger_budgets() {
    let small = reachable_functions(3, 5).unwrap();
    let large = reachable_functions(3, 6).unwrap();
    for (s, g) in small.iter() {
        assert_eq!(large.size_of(&s), Some(g), "{s}");
    }
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn prior_matches_per_string_class_counts() {
    // classes of size g computing each string, from the permutation oracle
    let perms: Vec<Vec<Vec<usize>>> = (0..=2).map(permutations).collect();
    let mut per_size: Vec<BTreeMap<u64, usize>> = Vec::new();
    for g in 0..=2 {
        let mut seen = HashSet::new();
        let mut counts = BTreeMap::new();
        for list in gate_lists(2, g) {
            let words = node_words(2, &list);
            for out in 0..2 + g {
                if seen.insert(brute_canonical(2, &list, out, &perms[g])) {
                    *counts.entry(words[out]).or_insert(0) += 1;
                }
            }
        }
        per_size.push(counts);
    }
    let catalog = Catalog::new(2, DEFAULT_BUDGET).unwrap();
    let prior = mu_exact(&NuFamily::Geometric, &catalog, 2).unwrap();
    for s in BitString::all(2) {
        let mut expected = r(0, 1);
        for (g, counts) in per_size.iter().enumerate() {
            let total: usize = counts.values().sum();
            let c = counts.get(&s.word()).copied().unwrap_or(0);
            expected += r(c as i64, total as i64 * (1 << (g + 1)));
        }
        assert_eq!(prior.mass(&s), expected, "{s}");
    }
    // frozen: 0101 at G_max = 1 is 1/2 * 1/2 + 1/4 * 3/9
    let g1 = mu_exact(&NuFamily::Geometric, &catalog, 1).unwrap();
    assert_eq!(g1.mass(&"0101".parse().unwrap()), r(1, 3));
    assert_eq!(per_size[2][&0b1010], 16);
}
