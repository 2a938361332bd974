use super::*;
use crate::model::parse_model;

fn build(src: &str) -> Result<Chain, ChainError> {
    build_chain(&parse_model(src).unwrap(), BuildOptions::default())
}

fn successors(chain: &Chain, s: usize) -> Vec<(Vec<i64>, f64)> {
    let mut out: Vec<_> = chain
        .row(s)
        .iter()
        .map(|&(t, p)| (chain.state(t).to_vec(), p))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn synchronised_branches_multiply() {
    let c = build(
        "module a x : [0..2] init 0; [go] x=0 -> 0.3 : (x'=1) + 0.7 : (x'=2); endmodule
         module b y : [0..2] init 0; [go] y=0 -> 0.5 : (y'=1) + 0.5 : (y'=2); endmodule",
    )
    .unwrap();
    let succ = successors(&c, c.initial());
    let probs: Vec<f64> = succ.iter().map(|s| s.1).collect();
    let expected = [0.15, 0.15, 0.35, 0.35];
    assert_eq!(succ.len(), 4);
    for (p, e) in probs.iter().zip(expected) {
        assert!((p - e).abs() < 1e-12, "{probs:?}");
    }
    assert_eq!(c.num_states(), 5);
    assert_eq!(c.absorbing().len(), 4);
}

#[test]
fn label_blocks_when_one_module_is_disabled() {
    let c = build(
        "module a x : [0..1] init 0; [go] x=0 -> (x'=1); endmodule
         module b y : [0..1] init 1; [go] y=0 -> (y'=1); endmodule",
    )
    .unwrap();
    assert_eq!(c.num_states(), 1);
    assert!(c.is_absorbing(0));
}

#[test]
fn no_commands_gives_one_absorbing_state() {
    let c = build("module m x : [0..3] init 2; endmodule").unwrap();
    assert_eq!(c.num_states(), 1);
    assert_eq!(c.row(0), &[(0, 1.0)]);
    assert!(classify_terminal(&c).terminating);
}

#[test]
fn two_cycle_does_not_terminate() {
    let c = build("module m x : [0..1] init 0; [] x=0 -> (x'=1); [] x=1 -> (x'=0); endmodule").unwrap();
    let report = classify_terminal(&c);
    assert!(!report.terminating);
    assert_eq!(report.offending, vec![vec![0, 1]]);
}

#[test]
fn nondeterminism_rejected_or_mixed() {
    let src = "module a x : [0..1] init 0; [] x=0 -> (x'=1); endmodule
               module b y : [0..1] init 0; [] y=0 -> (y'=1); endmodule";
    match build(src) {
        Err(ChainError::NondeterministicState { state, alternatives }) => {
            assert_eq!(state, "(x=0, y=0)");
            assert_eq!(alternatives.len(), 2);
        }
        other => panic!("{other:?}"),
    }
    let c = build_chain(
        &parse_model(src).unwrap(),
        BuildOptions::default().with_policy(Policy::Uniform),
    )
    .unwrap();
    let succ = successors(&c, 0);
    assert_eq!(succ, vec![(vec![0, 1], 0.5), (vec![1, 0], 0.5)]);
    assert!(classify_terminal(&c).terminating);
}

#[test]
fn conflicting_and_out_of_range_updates() {
    let conflict = "module a x : [0..1] init 0; [go] true -> (x'=1); endmodule
                    module b y : [0..1] init 0; [go] true -> (x'=0); endmodule";
    assert!(matches!(build(conflict), Err(ChainError::ConflictingAssignment { .. })));
    let overflow = "module a x : [0..1] init 0; [] true -> (x'=x+1); endmodule";
    assert!(matches!(
        build(overflow),
        Err(ChainError::Model(ModelError::OutOfDomain { .. }))
    ));
    let sum = "module a x : [0..1] init 0; [] x=0 -> 0.5 : (x'=1) + 0.4 : true; endmodule";
    assert!(matches!(build(sum), Err(ChainError::BranchSum { .. })));
}

#[test]
fn state_cap_enforced() {
    let m = parse_model("module a x : [0..100] init 0; [] x<100 -> (x'=x+1); endmodule").unwrap();
    let err = build_chain(&m, BuildOptions::default().with_state_cap(10)).unwrap_err();
    assert_eq!(err, ChainError::StateSpaceLimitExceeded { cap: 10 });
    assert_eq!(
        build_chain(&m, BuildOptions::default().with_state_cap(101))
            .unwrap()
            .num_states(),
        101
    );
}

#[test]
fn zero_probability_branches_are_dropped() {
    let c = build("const double p = 0; module a x : [0..2] init 0; [] x=0 -> p : (x'=1) + 1-p : (x'=2); endmodule").unwrap();
    assert_eq!(c.num_states(), 2);
    assert_eq!(c.state(1), &[2]);
}

#[test]
fn from_parts_validates() {
    let vars = vec![VarInfo {
        name: "s".into(),
        kind: Kind::Int,
        lo: 0,
        hi: 2,
    }];
    let ok = Chain::from_parts(
        vars.clone(),
        ConstantSet::new(),
        vec![vec![0], vec![1], vec![2]],
        0,
        vec![vec![(1, 0.25), (2, 0.75)], vec![(1, 1.0)], vec![(2, 1.0)]],
    )
    .unwrap();
    assert_eq!(ok.absorbing().into_iter().collect::<Vec<_>>(), vec![1, 2]);
    assert!(matches!(
        Chain::from_parts(
            vars.clone(),
            ConstantSet::new(),
            vec![vec![0], vec![1]],
            0,
            vec![vec![(1, 0.5)], vec![(1, 1.0)]],
        ),
        Err(ChainError::NotStochastic { .. })
    ));
    assert!(matches!(
        Chain::from_parts(
            vars,
            ConstantSet::new(),
            vec![vec![0], vec![1]],
            0,
            vec![vec![(0, 1.0)], vec![(1, 1.0)]],
        ),
        Err(ChainError::Unreachable(1))
    ));
}

#[test]
fn json_dump_lists_states() {
    let c = build("module m b : bool init false; [] !b -> (b'=true); endmodule").unwrap();
    let j = c.to_json();
    assert_eq!(j["states"], serde_json::json!([[0], [1]]));
    assert_eq!(j["absorbing"], serde_json::json!([1]));
    assert_eq!(c.describe_state(1), "(b=true)");
}

#[test]
fn tarjan_orders_components_bottom_first() {
    let rows = vec![
        vec![(1, 0.5), (2, 0.5)],
        vec![(0, 1.0)],
        vec![(3, 1.0)],
        vec![(2, 1.0)],
    ];
    let comps = strongly_connected_components(&rows);
    assert_eq!(comps, vec![vec![2, 3], vec![0, 1]]);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn dist(k: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(1u32..20, k).prop_map(|w| {
            let total: u32 = w.iter().sum();
            w.into_iter().map(|x| x as f64 / total as f64).collect()
        })
    }

    fn branches(var: &str, probs: &[f64]) -> String {
        // last branch takes the complement so the sum is exact
        let mut parts = Vec::new();
        let mut used = Vec::new();
        for (i, p) in probs.iter().enumerate() {
            let prob = if i + 1 == probs.len() {
                format!("1-({})", used.join("+"))
            } else {
                used.push(format!("{p:?}"));
                format!("{p:?}")
            };
            parts.push(format!("{prob} : ({var}'={})", i + 1));
        }
        if probs.len() == 1 {
            return format!("({var}'=1)");
        }
        parts.join(" + ")
    }

    proptest! {
        #[test]
        fn composition_matches_outer_product(a in (1usize..4).prop_flat_map(dist), b in (1usize..4).prop_flat_map(dist)) {
            let src = format!(
                "module ma x : [0..4] init 0; [go] x=0 -> {}; endmodule
                 module mb y : [0..4] init 0; [go] y=0 -> {}; endmodule",
                branches("x", &a),
                branches("y", &b),
            );
            let c = build(&src).unwrap();
            let succ = successors(&c, c.initial());
            prop_assert_eq!(succ.len(), a.len() * b.len());
            for (state, p) in succ {
                let pa = a[state[0] as usize - 1];
                let pb = b[state[1] as usize - 1];
                prop_assert!((p - pa * pb).abs() < 1e-9);
            }
            for s in 0..c.num_states() {
                let sum: f64 = c.row(s).iter().map(|r| r.1).sum();
                prop_assert!((sum - 1.0).abs() < 1e-9);
            }
            prop_assert!(classify_terminal(&c).terminating);
        }
    }
}
