use super::*;
use crate::chain::{build_chain, BuildOptions, VarInfo};
use crate::model::{parse_model, ConstantSet, Expr, Kind};

fn chain_of(src: &str) -> Chain {
    build_chain(&parse_model(src).unwrap(), BuildOptions::default()).unwrap()
}

fn prob(chain: &Chain, q: &str) -> f64 {
    check(chain, &parse_property(q).unwrap()).unwrap().probability
}

fn line_vars() -> Vec<VarInfo> {
    vec![VarInfo {
        name: "s".into(),
        kind: Kind::Int,
        lo: 0,
        hi: 63,
    }]
}

fn explicit(rows: Vec<Vec<(usize, f64)>>) -> Chain {
    let states = (0..rows.len() as i64).map(|i| vec![i]).collect();
    Chain::from_parts(line_vars(), ConstantSet::new(), states, 0, rows).unwrap()
}

#[test]
fn parses_query_and_bound_forms() {
    let q = parse_property("P=? [ F robotState=handoverSuccessful ]").unwrap();
    assert_eq!(q.mode, Mode::Query);
    assert_eq!(q.path.pattern_name(), "Eventually");

    let q = parse_property("P>=0.9 [ F robotState=handoverSuccessful ]").unwrap();
    assert_eq!(q.mode, Mode::Bound(Comparison::Ge, 0.9));

    let q = parse_property("P=? [ G (a => F (a & a)) ]").unwrap();
    let a = Expr::ident("a");
    assert_eq!(
        q.path,
        PathFormula::Response(a.clone(), Expr::binary(BinOp::And, a.clone(), a))
    );
}

#[test]
fn parses_every_pattern() {
    let cases = [
        ("P=? [ G x<3 ]", "Globally"),
        ("P=? [ G (x=1 => !X x=2) ]", "NextSafety"),
        ("P=? [ G (x=1 => X !(x=2)) ]", "NextSafety"),
        ("P=? [ x<2 U x=2 ]", "Until"),
        ("P=? [ G ((F x=1) | (F x=2) | (F x=0 U x=3)) ]", "GloballyAny"),
        ("P=? [ G (F x=1 | F (x=0 U x=3)) ]", "GloballyAny"),
        ("P=? ( G (¬(x=1 ∧ x=2) ⇒ ¬(x=3 ∨ x=4)) )", "Globally"),
    ];
    for (text, name) in cases {
        let q = parse_property(text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(q.path.pattern_name(), name, "{text}");
    }
    let a = parse_property("P=? [ G (x=1 => X !(x=2)) ]").unwrap();
    let b = parse_property("P=? [ G (x=1 => !X x=2) ]").unwrap();
    assert_eq!(a.path, b.path);
}

#[test]
fn display_reparses() {
    for text in [
        "req1: P>=0.9 [ F x=1 ]",
        "P=? [ G (x=1 => !X x=2) ]",
        "P<0.5 [ x<2 U x=2 ]",
        "P=? [ G (F x=1 | F (x=0 U x=3)) ]",
        "P=? [ G ((x+1)*2 = 4 => F x=3) ]",
    ] {
        let q = parse_property(text).unwrap();
        assert_eq!(parse_property(&q.to_string()).unwrap(), q, "{text}");
    }
}

#[test]
fn rejects_unsupported_nesting() {
    let err = parse_property("P=? [ F G x=1 ]").unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, PropError::UnsupportedPattern(_)));
    for pattern in ["F φ", "G φ", "G (φ => F ψ)", "G (φ => !X ψ)", "φ U ψ", "G (F φ"] {
        assert!(msg.contains(pattern), "{msg}");
    }
    assert!(matches!(
        parse_property("P=? [ X x=1 ]"),
        Err(PropError::UnsupportedPattern(_))
    ));
    assert!(matches!(parse_property("P>=1.5 [ F x=1 ]"), Err(PropError::BoundOutOfRange(_))));
    assert!(matches!(parse_property("P=? [ F x=1"), Err(PropError::Syntax(_))));
}

#[test]
fn property_file_with_names_and_comments() {
    let text = "// requirements\n\nreq1a: P>=0.95 [ F x=1 ] // strict\nP=? [ G x<3 ]\n";
    let qs = parse_property_file(text).unwrap();
    assert_eq!(qs.len(), 2);
    assert_eq!(qs[0].name.as_deref(), Some("req1a"));
    assert_eq!(qs[1].name, None);
    match parse_property_file("P=? [ F x=1 ]\nP=? [ F x= ]") {
        Err(PropError::Syntax(crate::model::ModelError::Syntax { line, .. })) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn atoms_are_checked_against_the_model() {
    let model = parse_model("const int done = 5; module m x : [0..5] init 0; [] x<5 -> (x'=5); endmodule").unwrap();
    assert!(parse_property_for("P=? [ F x=done ]", &model).is_ok());
    assert!(parse_property_for("P=? [ F done ]", &model).is_ok());
    assert_eq!(
        parse_property_for("P=? [ F y=1 ]", &model),
        Err(PropError::UnboundAtomIdentifier("y".into()))
    );
    assert!(matches!(
        parse_property_for("P=? [ F x+1 ]", &model),
        Err(PropError::AtomResolution(_))
    ));
}

#[test]
fn bare_constant_atoms_need_a_unique_variable() {
    let c = chain_of(
        "const int ok = 1100; const int two = 2;
         module m r : [1100..1101] init 1101; y : [0..3] init 0; z : [0..3] init 0;
           [] r=1101 -> (r'=ok); endmodule",
    );
    assert_eq!(prob(&c, "P=? [ F ok ]"), 1.0);
    assert!(matches!(
        check(&c, &parse_property("P=? [ F two ]").unwrap()),
        Err(PropError::AtomResolution(_))
    ));
}

#[test]
fn tautological_response_is_certain() {
    let c = chain_of("const bool a = true; module m x : [0..2] init 0; [] x=0 -> 0.5 : (x'=1) + 0.5 : (x'=2); endmodule");
    assert_eq!(prob(&c, "P=? [ G (a => F (a & a)) ]"), 1.0);
}

#[test]
fn monitor_traces() {
    const PHI: u32 = 1;
    const PSI: u32 = 2;
    let response = compile_monitor(&PathFormula::Response((), ()));
    assert!(response.accepts(&[0, PHI, PSI]));
    assert!(!response.accepts(&[0, PHI]));

    let next = compile_monitor(&PathFormula::NextSafety((), ()));
    assert!(!next.accepts(&[PHI, PSI]));
    assert!(next.accepts(&[PHI, 0, PSI]));
    assert!(!next.accepts(&[PHI | PSI]));

    // success, unsuccessful, (wait U timedOut): atoms 0, 1, 2, 3
    let any = compile_monitor(&PathFormula::GloballyAny(vec![
        Eventuality::Eventually(()),
        Eventuality::Eventually(()),
        Eventuality::EventuallyUntil((), ()),
    ]));
    let wait = 1 << 2;
    let timed_out = 1 << 3;
    let motion_error = 0;
    assert!(!any.accepts(&[0, wait, motion_error]));
    assert!(any.accepts(&[0, wait, timed_out]));
    assert!(any.accepts(&[0, 1]));

    for m in [&response, &next, &any] {
        assert!(m.num_states() <= 4);
    }
}

#[test]
fn reachability_examples() {
    let line = explicit(vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(2, 1.0)]]);
    for opts in [SolverOptions::default(), SolverOptions::exact()] {
        assert_eq!(reachability_prob(&line, &[2], opts).unwrap().values, vec![1.0, 1.0, 1.0]);
    }
    let branch = explicit(vec![vec![(1, 0.98), (2, 0.02)], vec![(1, 1.0)], vec![(2, 1.0)]]);
    let sol = reachability_prob(&branch, &[1], SolverOptions::default()).unwrap();
    assert!((sol.values[0] - 0.98).abs() < 1e-15);
    assert_eq!(sol.values[2], 0.0);
}

#[test]
fn transient_cycles_converge() {
    // retry loop: 0 -> 0 with 0.5, -> 1 with 0.3, -> 2 with 0.2
    let c = explicit(vec![vec![(0, 0.5), (1, 0.3), (2, 0.2)], vec![(1, 1.0)], vec![(2, 1.0)]]);
    let vi = reachability_prob(&c, &[1], SolverOptions::default()).unwrap();
    let ge = reachability_prob(&c, &[1], SolverOptions::exact()).unwrap();
    assert!((vi.values[0] - 0.6).abs() < 1e-11);
    assert!((ge.values[0] - 0.6).abs() < 1e-15);
    assert!(matches!(
        brute_force_prob(&c, &parse_property("P=? [ F s=1 ]").unwrap(), 1000),
        Err(PropError::PathCapExceeded { cap: 1000 })
    ));
}

#[test]
fn non_terminating_chain_is_refused() {
    let c = chain_of("module m x : [0..1] init 0; [] x=0 -> (x'=1); [] x=1 -> (x'=0); endmodule");
    assert!(matches!(
        check(&c, &parse_property("P=? [ F x=1 ]").unwrap()),
        Err(PropError::NonTerminatingChain { .. })
    ));
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let c = explicit(vec![vec![(0, 0.9), (1, 0.1)], vec![(1, 1.0)]]);
    let opts = SolverOptions {
        max_sweeps: 3,
        ..SolverOptions::default()
    };
    assert!(matches!(
        reachability_prob(&c, &[1], opts),
        Err(PropError::NumericalNonConvergence { sweeps: 3, .. })
    ));
}

#[test]
fn single_certain_path() {
    let c = chain_of("module m x : [0..3] init 0; [] x<3 -> (x'=x+1); endmodule");
    let q = parse_property("P=? [ F x=3 ]").unwrap();
    assert_eq!(brute_force_prob(&c, &q, 10).unwrap(), 1.0);
    assert_eq!(check(&c, &q).unwrap().probability, 1.0);
}

mod props {
    use super::*;
    use crate::model::BinOp;
    use proptest::prelude::*;

    /// DAG over `n` states whose last `absorbing` states are absorbing;
    /// every state has a transient predecessor so all are reachable.
    #[derive(Debug, Clone)]
    struct RandomChain {
        rows: Vec<Vec<(usize, f64)>>,
    }

    fn normalise(edges: Vec<(usize, u32)>) -> Vec<(usize, f64)> {
        let total: u32 = edges.iter().map(|e| e.1).sum();
        edges.into_iter().map(|(t, w)| (t, w as f64 / total as f64)).collect()
    }

    fn random_dag(max_states: usize) -> impl Strategy<Value = RandomChain> {
        (2..=max_states)
            .prop_flat_map(|n| (Just(n), 1..n.min(4)))
            .prop_flat_map(|(n, absorbing)| {
                let transient = n - absorbing;
                let preds = (1..n)
                    .map(move |j| 0..j.min(transient))
                    .collect::<Vec<_>>();
                let extra = proptest::collection::vec((0..n, 0..n, 1u32..10), 0..2 * n);
                let weights = proptest::collection::vec(1u32..10, n);
                (Just(n), Just(transient), preds, extra, weights)
            })
            .prop_map(|(n, transient, preds, extra, weights)| {
                let mut edges: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n];
                for (j, &i) in preds.iter().enumerate() {
                    edges[i].push((j + 1, weights[j + 1]));
                }
                for (a, b, w) in extra {
                    let (i, j) = (a.min(b), a.max(b));
                    if i < transient && i != j {
                        edges[i].push((j, w));
                    }
                }
                let rows = (0..n)
                    .map(|i| {
                        if i >= transient || edges[i].is_empty() {
                            vec![(i, 1.0)]
                        } else {
                            normalise(std::mem::take(&mut edges[i]))
                        }
                    })
                    .collect();
                RandomChain { rows }
            })
    }

    /// Chain with back edges; a forward spine keeps it terminating.
    fn random_cyclic(n: usize) -> impl Strategy<Value = RandomChain> {
        let absorbing = 3;
        (
            proptest::collection::vec((0..n, 1u32..10), n - absorbing),
            proptest::collection::vec(1u32..10, n - absorbing),
        )
            .prop_map(move |(extra, spine)| {
                let transient = n - absorbing;
                let rows = (0..n)
                    .map(|i| {
                        if i >= transient {
                            return vec![(i, 1.0)];
                        }
                        let mut e = vec![(i + 1, spine[i])];
                        let (t, w) = extra[i];
                        e.push((t, w));
                        e.push((transient + i % absorbing, 1));
                        normalise(e)
                    })
                    .collect();
                RandomChain { rows }
            })
    }

    fn to_chain(rc: &RandomChain) -> Chain {
        explicit(rc.rows.clone())
    }

    fn subset_expr(mask: u64) -> Expr {
        (0..64)
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| Expr::binary(BinOp::Eq, Expr::ident("s"), Expr::Int(k)))
            .reduce(|a, b| Expr::binary(BinOp::Or, a, b))
            .unwrap_or(Expr::Bool(false))
    }

    fn atom() -> impl Strategy<Value = Expr> {
        (0u64..256).prop_map(subset_expr)
    }

    fn pattern() -> impl Strategy<Value = PathFormula> {
        let ev = prop_oneof![
            atom().prop_map(Eventuality::Eventually),
            (atom(), atom()).prop_map(|(a, b)| Eventuality::EventuallyUntil(a, b)),
        ];
        prop_oneof![
            atom().prop_map(PathFormula::Eventually),
            atom().prop_map(PathFormula::Globally),
            (atom(), atom()).prop_map(|(a, b)| PathFormula::Response(a, b)),
            (atom(), atom()).prop_map(|(a, b)| PathFormula::NextSafety(a, b)),
            (atom(), atom()).prop_map(|(a, b)| PathFormula::Until(a, b)),
            proptest::collection::vec(ev, 1..4).prop_map(PathFormula::GloballyAny),
        ]
    }

    fn query(path: PathFormula) -> PropertyQuery {
        PropertyQuery {
            name: None,
            mode: Mode::Query,
            path,
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn check_matches_brute_force(rc in random_dag(8), path in pattern()) {
            let chain = to_chain(&rc);
            let q = query(path);
            let p = check(&chain, &q).unwrap().probability;
            let oracle = brute_force_prob(&chain, &q, DEFAULT_PATH_CAP).unwrap();
            prop_assert!((p - oracle).abs() < 1e-12, "check {p} oracle {oracle}");
            let exact = check_with(&chain, &q, SolverOptions::exact()).unwrap().probability;
            prop_assert!((exact - oracle).abs() < 1e-12);
        }

        #[test]
        fn globally_is_dual_to_eventually(rc in random_dag(8), phi in atom()) {
            let chain = to_chain(&rc);
            let g = check(&chain, &query(PathFormula::Globally(phi.clone()))).unwrap().probability;
            let f = check(&chain, &query(PathFormula::Eventually(Expr::not(phi)))).unwrap().probability;
            prop_assert!((g - (1.0 - f)).abs() < 1e-12);
        }

        #[test]
        fn bound_verdicts_follow_the_probability(rc in random_dag(8), phi in atom(), b in 0.0f64..=1.0) {
            let chain = to_chain(&rc);
            let q = PropertyQuery { name: None, mode: Mode::Bound(Comparison::Ge, b), path: PathFormula::Eventually(phi) };
            let r = check(&chain, &q).unwrap();
            prop_assert_eq!(r.verdict, Some(r.probability >= b - 1e-12));
        }

        #[test]
        fn moving_mass_to_an_accepting_state_never_lowers_eventually(
            rc in random_dag(8),
            pick in any::<prop::sample::Index>(),
            delta in 0.0f64..1.0,
        ) {
            let n = rc.rows.len();
            let accepting = n - 1;
            let chain = to_chain(&rc);
            let q = query(PathFormula::Eventually(subset_expr(1 << accepting)));
            let before = check(&chain, &q).unwrap().probability;

            let mut rows = rc.rows.clone();
            let s = pick.index(n);
            if rows[s] != vec![(s, 1.0)] {
                // shift a fraction of every edge's mass onto the accepting state
                let mut moved = 0.0;
                for e in rows[s].iter_mut() {
                    let take = e.1 * delta;
                    e.1 -= take;
                    moved += take;
                }
                rows[s].push((accepting, moved));
            }
            let after = check(&explicit(rows), &q).unwrap().probability;
            prop_assert!(after >= before - 1e-12, "{before} -> {after}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn value_iteration_matches_elimination(rc in random_cyclic(50), targets in proptest::collection::btree_set(47usize..50, 1..3)) {
            let chain = to_chain(&rc);
            let targets: Vec<usize> = targets.into_iter().collect();
            let vi = reachability_prob(&chain, &targets, SolverOptions::default()).unwrap();
            let ge = reachability_prob(&chain, &targets, SolverOptions::exact()).unwrap();
            for (a, b) in vi.values.iter().zip(&ge.values) {
                prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }
}
