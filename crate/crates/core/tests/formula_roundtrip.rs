//! Printing a formula and parsing it back is the identity.

use proptest::prelude::*;

use estit::formula::{parse, Agent, Formula};

fn formula_strategy() -> impl Strategy<Value = Formula> {
    let atom = prop_oneof![
        Just(Formula::atom("p")),
        Just(Formula::atom("q")),
        Just(Formula::atom("long_atom1")),
    ];
    let agent = prop_oneof![Just(Agent::new("a")), Just(Agent::new("b"))];
    atom.prop_recursive(5, 64, 3, move |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            inner.clone().prop_map(Formula::nec),
            inner.clone().prop_map(Formula::diamond),
            (agent.clone(), inner.clone())
                .prop_map(|(a, f)| Formula::Stit(a, Box::new(f))),
            (agent.clone(), inner.clone())
                .prop_map(|(a, f)| Formula::Knows(a, Box::new(f))),
            (agent.clone(), inner.clone())
                .prop_map(|(a, f)| Formula::ObjOught(a, Box::new(f))),
            (agent.clone(), inner.clone())
                .prop_map(|(a, f)| Formula::SubjOught(a, Box::new(f))),
        ]
    })
}

proptest! {
    #[test]
    fn print_then_parse_round_trips(f in formula_strategy()) {
        let text = f.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(back, f);
    }
}
