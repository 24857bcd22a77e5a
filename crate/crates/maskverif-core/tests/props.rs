//! Property tests for the algebraic core: monomial and set-product laws,
//! per-net model containment, mux-lowering equivalence, and schedule
//! splitting fidelity on the built-in fixtures.

use std::collections::BTreeMap;

use maskverif_core::circuit::{Circuit, CircuitBuilder, GateKind, NetId};
use maskverif_core::label::{
    propagate, set_product, BaseVar, CorrelationSet, Labeling, Model, Monomial, Role,
};
use maskverif_core::oracle::{scheduled_tables, simulate_all};
use maskverif_core::{generate, list, split_all};

use proptest::prelude::*;

const VARS: [BaseVar; 6] = [
    BaseVar::Secret(0),
    BaseVar::Secret(1),
    BaseVar::ShareMask(0, 1),
    BaseVar::Mask(7),
    BaseVar::Mask(9),
    BaseVar::Public(3),
];

fn arb_monomial() -> impl Strategy<Value = Monomial> {
    proptest::bits::u8::between(0, 6)
        .prop_map(|bits| {
            Monomial::from_vars(
                VARS.iter()
                    .enumerate()
                    .filter(|(i, _)| bits >> i & 1 == 1)
                    .map(|(_, v)| *v),
            )
        })
}

fn arb_set(max: usize) -> impl Strategy<Value = CorrelationSet> {
    proptest::collection::btree_set(arb_monomial(), 0..max)
}

proptest! {
    #[test]
    fn monomial_product_laws(a in arb_monomial(), b in arb_monomial(), c in arb_monomial()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&a), Monomial::empty());
        prop_assert_eq!(a.mul(&Monomial::empty()), a.clone());
    }

    #[test]
    fn set_product_laws(a in arb_set(8), b in arb_set(8), c in arb_set(8)) {
        let cap = usize::MAX;
        let ab = set_product(&a, &b, false, cap).unwrap();
        let ba = set_product(&b, &a, false, cap).unwrap();
        prop_assert_eq!(&ab, &ba);
        let ab_c = set_product(&ab, &c, false, cap).unwrap();
        let bc = set_product(&b, &c, false, cap).unwrap();
        let a_bc = set_product(&a, &bc, false, cap).unwrap();
        prop_assert_eq!(ab_c, a_bc);

        // The augmented product covers the plain one plus each side alone.
        let aug = set_product(&a, &b, true, cap).unwrap();
        prop_assert!(ab.iter().all(|m| aug.contains(m)));
        prop_assert!(a.iter().all(|m| aug.contains(m)));
        prop_assert!(b.iter().all(|m| aug.contains(m)));
        prop_assert!(aug.contains(&Monomial::empty()));
    }

    #[test]
    fn set_product_cap_is_exact(a in arb_set(8), b in arb_set(8)) {
        let full = set_product(&a, &b, true, usize::MAX).unwrap();
        prop_assert!(set_product(&a, &b, true, full.len()).is_ok());
        if full.len() > 1 {
            prop_assert!(set_product(&a, &b, true, full.len() - 1).is_err());
        }
    }
}

// Deterministic circuit construction from a gate recipe. Operand indices
// wrap over the nets built so far, so any recipe is a valid feed-forward
// netlist.
#[derive(Clone, Debug)]
struct Recipe {
    inputs: usize,
    gates: Vec<(u8, u16, u16, u16)>,
}

fn build(recipe: &Recipe, with_mux: bool) -> Circuit {
    let mut b = CircuitBuilder::new();
    let mut nets: Vec<NetId> = (0..recipe.inputs)
        .map(|i| b.input(&format!("i{i}")).unwrap())
        .collect();
    for (n, &(kind, x, y, z)) in recipe.gates.iter().enumerate() {
        let pool = [
            GateKind::And,
            GateKind::Or,
            GateKind::Xor,
            GateKind::Xnor,
            GateKind::Nand,
            GateKind::Nor,
            GateKind::Not,
            GateKind::Buf,
            GateKind::Mux,
        ];
        let limit = if with_mux { pool.len() } else { pool.len() - 1 };
        let kind = pool[kind as usize % limit];
        let pick = |v: u16| nets[v as usize % nets.len()];
        let ops: Vec<NetId> = match kind.arity() {
            1 => vec![pick(x)],
            2 => vec![pick(x), pick(y)],
            _ => vec![pick(x), pick(y), pick(z)],
        };
        let id = b.node(&format!("g{n}"), kind, &ops).unwrap();
        nets.push(id);
    }
    let last = *nets.last().unwrap();
    b.output(last);
    b.finish().unwrap()
}

fn arb_recipe() -> impl Strategy<Value = Recipe> {
    (
        2usize..5,
        proptest::collection::vec((any::<u8>(), any::<u16>(), any::<u16>(), any::<u16>()), 1..24),
    )
        .prop_map(|(inputs, gates)| Recipe { inputs, gates })
}

// Interleaved roles keep every labeling valid: the first two inputs carry
// the two shares of one secret, the rest alternate mask and public.
fn label_inputs(c: &Circuit) -> Labeling {
    let mut l = Labeling::new();
    let s = l.secret_id("s");
    for (i, &net) in c.inputs().iter().enumerate() {
        let role = match i {
            0 => Role::Share { secret: s, index: 1 },
            1 => Role::Share { secret: s, index: 2 },
            n if n % 2 == 0 => Role::Mask,
            _ => Role::Public,
        };
        l.assign(net, role);
    }
    l
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Whatever a settled probe sees, a glitching one may also see.
    #[test]
    fn stable_sets_contained_in_transient(recipe in arb_recipe()) {
        let c = build(&recipe, false);
        let l = label_inputs(&c);
        let cap = 1 << 16;
        let stable = propagate(&c, &l, Model::Stable, cap);
        let transient = propagate(&c, &l, Model::Transient, cap);
        if let (Ok(stable), Ok(transient)) = (stable, transient) {
            for (id, _) in c.nodes() {
                let s = &stable[id.index()];
                let t = &transient[id.index()];
                prop_assert!(s.iter().all(|m| t.contains(m)), "net {}", c.name(id));
            }
        }
    }

    #[test]
    fn propagation_is_deterministic(recipe in arb_recipe()) {
        let c = build(&recipe, false);
        let l = label_inputs(&c);
        let cap = 1 << 16;
        if let (Ok(a), Ok(b)) = (
            propagate(&c, &l, Model::Transient, cap),
            propagate(&c, &l, Model::Transient, cap),
        ) {
            prop_assert_eq!(a, b);
        }
    }

    // Lowering muxes to and/or gates must not change any net's function.
    #[test]
    fn lower_mux_preserves_function(recipe in arb_recipe(), samples in proptest::collection::vec(any::<u64>(), 4)) {
        let c = build(&recipe, true);
        let lowered = c.lower_mux();
        for sample in samples {
            let mut ins = BTreeMap::new();
            for (i, &net) in c.inputs().iter().enumerate() {
                ins.insert(net, sample >> i & 1 == 1);
            }
            let a = c.comb_eval(&ins).unwrap();
            let b = lowered.comb_eval(&ins).unwrap();
            for (id, _) in c.nodes() {
                prop_assert_eq!(a[id.index()], b[id.index()], "net {}", c.name(id));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Splitting a scheduled fixture must not change what it computes: every
    // sub-design net evaluates exactly as its origin net does in the whole
    // design, for all inputs.
    #[test]
    fn split_preserves_evaluation(which in 0usize..11, seed in any::<u64>()) {
        let spec = list()[which % list().len()];
        let (c, l) = generate(spec.name, false, None).unwrap();
        if c.fsm().is_none() {
            return Ok(());
        }
        let whole = scheduled_tables(&c).unwrap();
        let subs = split_all(&c, &l).unwrap();
        let idx = (seed % (1u64 << c.inputs().len().min(20))) as usize;
        for sd in &subs {
            let sub_tt = simulate_all(&sd.circuit).unwrap();
            // Map the whole-design assignment onto the sub-design's inputs,
            // then compare every net against its origin.
            let mut sub_idx = 0usize;
            for (p, &inp) in sd.circuit.inputs().iter().enumerate() {
                let origin = sd.origin_of(inp);
                let pos = c
                    .inputs()
                    .iter()
                    .position(|&w| w == origin)
                    .expect("sub-design inputs originate from whole-design inputs");
                if idx >> pos & 1 == 1 {
                    sub_idx |= 1 << p;
                }
            }
            for (id, node) in sd.circuit.nodes() {
                if node.kind == GateKind::Input {
                    continue;
                }
                let origin = sd.origin_of(id);
                prop_assert_eq!(
                    sub_tt.bit(id, sub_idx),
                    whole.bit(origin, idx),
                    "{} net {} state {}",
                    spec.name,
                    sd.circuit.name(id),
                    sd.state
                );
            }
        }
    }
}
