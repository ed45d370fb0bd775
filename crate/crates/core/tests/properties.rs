use circuit_prior::circuit::{dnf_circuit, hardcode_bit, hardcode_overhead};
use circuit_prior::complexity::ComplexityOracle;
use circuit_prior::enumeration::{sample_uniform_circuit, Catalog, DEFAULT_BUDGET};
use circuit_prior::predictor::{run_trace, Outcome, TieMode};
use circuit_prior::prior::{mu_exact, NuFamily};
use circuit_prior::{BitString, Circuit, NodeRef, Pattern};
use proptest::prelude::*;

fn node(id: usize, inputs: u8) -> NodeRef {
    if id < inputs as usize {
        NodeRef::Input(id as u8)
    } else {
        NodeRef::Gate((id - inputs as usize) as u16)
    }
}

fn node_id(r: NodeRef, inputs: u8) -> usize {
    match r {
        NodeRef::Input(j) => j as usize,
        NodeRef::Gate(k) => inputs as usize + k as usize,
    }
}

/// Random valid circuits: `raw` picks operands modulo the available nodes.
fn circuit_strategy(max_inputs: u8, max_size: usize) -> impl Strategy<Value = Circuit> {
    (1..=max_inputs, prop::collection::vec((any::<u16>(), any::<u16>()), 0..=max_size), any::<u16>()).prop_map(
        |(inputs, raw, out)| {
            let l = inputs as usize;
            let gates = raw
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| [node(a as usize % (l + k), inputs), node(b as usize % (l + k), inputs)])
                .collect::<Vec<_>>();
            let output = node(out as usize % (l + gates.len()), inputs);
            Circuit::new(inputs, gates, output).unwrap()
        },
    )
}

/// Reorders gates into another topological order chosen by `keys`, and
/// swaps operands where `swaps` says so.
fn relabel(c: &Circuit, keys: &[u32], swaps: &[bool]) -> Circuit {
    let l = c.inputs() as usize;
    let g = c.size();
    let deps: Vec<Vec<usize>> = c
        .gates()
        .iter()
        .map(|ops| ops.iter().map(|&r| node_id(r, c.inputs())).filter(|&id| id >= l).map(|id| id - l).collect())
        .collect();
    let mut placed = vec![false; g];
    let mut order = Vec::with_capacity(g);
    while order.len() < g {
        let next = (0..g)
            .filter(|&k| !placed[k] && deps[k].iter().all(|&d| placed[d]))
            .min_by_key(|&k| keys[k % keys.len().max(1)].wrapping_add(k as u32))
            .unwrap();
        placed[next] = true;
        order.push(next);
    }
    let mut new_pos = vec![0; g];
    for (pos, &k) in order.iter().enumerate() {
        new_pos[k] = pos;
    }
    let map = |r: NodeRef| match r {
        NodeRef::Gate(k) => NodeRef::Gate(new_pos[k as usize] as u16),
        input => input,
    };
    let gates = order
        .iter()
        .enumerate()
        .map(|(pos, &k)| {
            let [a, b] = c.gates()[k];
            if swaps.get(pos).copied().unwrap_or(false) {
                [map(b), map(a)]
            } else {
                [map(a), map(b)]
            }
        })
        .collect();
    Circuit::new(c.inputs(), gates, map(c.output())).unwrap()
}

proptest! {
    #[test]
    fn compute_string_agrees_with_evaluate(c in circuit_strategy(5, 12)) {
        let s = c.compute_string();
        for i in 0..s.len() {
            prop_assert_eq!(s.bit(i), c.evaluate(i).unwrap());
        }
    }

    #[test]
    fn canonicalize_is_idempotent(c in circuit_strategy(4, 9)) {
        let canon = c.canonicalize();
        prop_assert!(canon.is_canonical());
        prop_assert_eq!(canon.canonicalize(), canon.clone());
        prop_assert_eq!(canon.compute_string(), c.compute_string());
        prop_assert_eq!(canon.size(), c.size());
    }

    #[test]
    fn canonical_form_ignores_relabeling(
        c in circuit_strategy(4, 9),
        keys in prop::collection::vec(any::<u32>(), 1..10),
        swaps in prop::collection::vec(any::<bool>(), 9),
    ) {
        let r = relabel(&c, &keys, &swaps);
        prop_assert_eq!(r.compute_string(), c.compute_string());
        prop_assert_eq!(r.canonicalize(), c.canonicalize());
    }

    #[test]
    fn text_format_round_trips(c in circuit_strategy(6, 10)) {
        let parsed: Circuit = c.to_string().parse().unwrap();
        prop_assert_eq!(parsed, c);
    }

    #[test]
    fn dnf_round_trip_random(inputs in 3u8..=6, word in any::<u64>()) {
        let n = 1usize << inputs;
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let s = BitString::new(inputs, word & mask).unwrap();
        prop_assert_eq!(dnf_circuit(&s).compute_string(), s);
    }

    #[test]
    fn hardcode_changes_only_the_target(c in circuit_strategy(5, 8), i in any::<usize>(), b in any::<bool>()) {
        let s = c.compute_string();
        let i = i % s.len();
        let h = hardcode_bit(&c, i, b).unwrap();
        prop_assert_eq!(h.circuit.compute_string(), s.with_bit(i, b));
        prop_assert!(h.overhead <= hardcode_overhead(c.inputs()).unwrap());
    }

    #[test]
    fn pattern_text_round_trips(inputs in 1u8..=4, det in any::<u64>(), val in any::<u64>()) {
        let n = 1usize << inputs;
        let mask = (1u64 << n) - 1;
        let p = Pattern::new(inputs, det & mask, val & det & mask).unwrap();
        prop_assert_eq!(Pattern::parse(&p.to_string()).unwrap(), p);
    }
}

#[test]
fn dnf_round_trip_exhaustive() {
    for l in 1..=3 {
        for s in BitString::all(l) {
            assert_eq!(dnf_circuit(&s).compute_string(), s, "{s}");
        }
    }
    let oracle = ComplexityOracle::new(2, 6).unwrap();
    let s: BitString = "0110".parse().unwrap();
    assert!(dnf_circuit(&s).size() >= oracle.value(&s.to_pattern()).unwrap().unwrap());
}

/// Every circuit of at most two gates at L = 2, with ordered operands.
fn small_circuits() -> Vec<Circuit> {
    let mut out = Vec::new();
    let mut lists: Vec<Vec<[NodeRef; 2]>> = vec![Vec::new()];
    for size in 0..=2 {
        for gates in &lists {
            for o in 0..2 + size {
                out.push(Circuit::new(2, gates.clone(), node(o, 2)).unwrap());
            }
        }
        lists = lists
            .iter()
            .flat_map(|g| {
                let nodes = 2 + g.len();
                (0..nodes * nodes).map(move |ab| {
                    let mut g = g.clone();
                    g.push([node(ab / nodes, 2), node(ab % nodes, 2)]);
                    g
                })
            })
            .collect();
    }
    out
}

#[test]
fn hardcode_contract_exhaustive() {
    let circuits = small_circuits();
    assert_eq!(circuits.len(), 2 + 4 * 3 + 4 * 9 * 4);
    for c in &circuits {
        let s = c.compute_string();
        for i in 0..4 {
            for b in [false, true] {
                let h = hardcode_bit(c, i, b).unwrap();
                let t = h.circuit.compute_string();
                assert_eq!(t, s.with_bit(i, b), "{c}\ni={i} b={b}");
                assert_eq!(h.overhead, h.circuit.size() - c.size());
            }
        }
        assert!(hardcode_bit(c, 4, true).is_err());
    }
}

#[test]
fn evaluation_is_total_on_enumerated_circuits() {
    let catalog = Catalog::new(2, DEFAULT_BUDGET).unwrap();
    for g in 0..=3 {
        for c in catalog.classes(g).unwrap().iter() {
            let s = c.compute_string();
            assert!((0..4).all(|i| c.evaluate(i).unwrap() == s.bit(i)));
            assert!(c.evaluate(4).is_err());
        }
    }
}

#[test]
fn class_counts_grow_with_size() {
    let catalog = Catalog::new(2, DEFAULT_BUDGET).unwrap();
    let counts: Vec<u64> = (0..=5).map(|g| catalog.count(g).unwrap().unwrap()).collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    // appending a dead gate is injective on classes
    for g in 0..=2 {
        let extended: std::collections::HashSet<Circuit> = catalog
            .classes(g)
            .unwrap()
            .iter()
            .map(|c| {
                let mut gates = c.gates().to_vec();
                gates.push([NodeRef::Input(0), NodeRef::Input(0)]);
                Circuit::new(2, gates, c.output()).unwrap().canonicalize()
            })
            .collect();
        assert_eq!(extended.len() as u64, counts[g]);
    }
}

#[test]
fn uniform_sampler_passes_chi_squared() {
    // 0.999 quantiles of chi-squared with 8 and 56 degrees of freedom
    for (g, classes, critical) in [(1usize, 9usize, 26.1245), (2, 57, 94.4605)] {
        let catalog = Catalog::new(2, DEFAULT_BUDGET).unwrap();
        let all = catalog.classes(g).unwrap();
        assert_eq!(all.len(), classes);
        let draws = 200 * classes;
        let mut counts = std::collections::HashMap::new();
        for seed in 0..draws as u64 {
            let c = sample_uniform_circuit(2, g, seed, DEFAULT_BUDGET).unwrap();
            assert!(!c.approximate);
            *counts.entry(c.circuit).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), classes);
        let expected = draws as f64 / classes as f64;
        let stat: f64 = counts.values().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        assert!(stat < critical, "g={g}: chi-squared {stat} >= {critical}");
    }
}

#[test]
fn prefix_and_star_identities() {
    let oracle = ComplexityOracle::new(2, 6).unwrap();
    let i = |p: &Pattern| oracle.value(p).unwrap().unwrap();
    let overhead = hardcode_overhead(2).unwrap();
    let mut two_l_violations = Vec::new();
    for x in BitString::all(2) {
        for k in 0..4 {
            let before = i(&x.prefix(k));
            let after = i(&x.prefix(k + 1));
            assert!(before <= after, "{x} k={k}");
            assert!(after <= before + overhead, "{x} k={k}");
            if after > before + 4 {
                two_l_violations.push((x, k));
            }
        }
    }
    assert!(two_l_violations.is_empty(), "jumps above 2L: {two_l_violations:?}");
    for prefix in BitString::all(2).map(|s| s.prefix(3)) {
        let ext = [false, true].map(|b| i(&prefix.with_bit(3, b)));
        assert_eq!(i(&prefix), ext[0].min(ext[1]), "{prefix}");
    }
}

#[test]
fn trace_invariants_exhaustive() {
    let oracle = ComplexityOracle::new(2, 6).unwrap();
    for x in BitString::all(2) {
        let t = run_trace(&oracle, &x, TieMode::Set).unwrap();
        let n: Vec<usize> = t.n_sequence().into_iter().map(Option::unwrap).collect();
        assert_eq!(n[0], 0);
        assert_eq!(*n.last().unwrap(), t.complexity.unwrap());
        for (k, rec) in t.records.iter().enumerate() {
            assert!(n[k] <= n[k + 1], "{x}");
            if rec.outcome == Outcome::Error {
                assert!(n[k + 1] > n[k], "{x} k={k}");
                assert!(!rec.prediction.contains(x.bit(k)));
            }
            assert_eq!(rec.outcome == Outcome::Uncertain, rec.prediction.is_tie());
        }
        let errors = t.records.iter().filter(|r| r.outcome == Outcome::Error).count();
        let uncertain = t.records.iter().filter(|r| r.outcome == Outcome::Uncertain).count();
        assert_eq!((errors, uncertain), (t.errors, t.uncertain));
        assert!(t.errors <= t.complexity.unwrap());
    }
}

#[test]
fn prior_is_normalized_and_monotone() {
    let catalog = Catalog::new(2, DEFAULT_BUDGET).unwrap();
    let fixtures = [
        NuFamily::Geometric,
        NuFamily::parse("table:0:1/4,1:1/4,2:1/4,3:1/4").unwrap(),
        NuFamily::parse("table:1:1/3,4:1/2").unwrap(),
    ];
    for nu in &fixtures {
        let mut previous: Option<circuit_prior::prior::PriorTable> = None;
        for g_max in 0..=5 {
            let t = mu_exact(nu, &catalog, g_max).unwrap();
            assert_eq!(t.total_mass() + &t.tail, num_traits::One::one(), "{nu} G_max={g_max}");
            if let Some(p) = &previous {
                for s in BitString::all(2) {
                    assert!(t.mass(&s) >= p.mass(&s));
                }
            }
            previous = Some(t);
        }
    }
}
