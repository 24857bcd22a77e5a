use maskverif::json::{export_structural_json, import_structural_json};
use maskverif::text::{dump_labels, dump_netlist, parse_labels, parse_netlist};
use maskverif_core::label::Role;
use maskverif_core::{generate, inject_reassociation, list, GateKind};

#[test]
fn minimal_netlist_parses() {
    let c = parse_netlist("input a; input b; wire y = AND a b; output y;").unwrap();
    assert_eq!(c.len(), 3);
    let names: Vec<&str> = c.inputs().iter().map(|&n| c.name(n)).collect();
    assert_eq!(names, ["a", "b"]);
    assert_eq!(c.outputs().len(), 1);
    assert_eq!(c.name(c.outputs()[0]), "y");
    assert_eq!(c.node(c.net("y").unwrap()).kind, GateKind::And);
}

const EXAMPLE: &str = "\
# two XORs and one AND feeding a buffered output
input s_m ;
input m_s ;
input m1 ;
input p1 ;
wire G1 = XOR s_m m1 ;
wire G2 = AND m_s p1 ;
wire G3 = XOR G1 G2 ;
wire q = BUF G3 ;
output q ;
";

#[test]
fn example_circuit_parses_and_orders() {
    let c = parse_netlist(EXAMPLE).unwrap();
    assert_eq!(c.len(), 8);
    let topo = c.topo_order().unwrap();
    assert_eq!(c.name(*topo.last().unwrap()), "q");
}

#[test]
fn example_labels_derive_share_encoding() {
    let c = parse_netlist(EXAMPLE).unwrap();
    let l = parse_labels(
        "s_m: share 1 of 1\nm_s: share 2 of 1\nm1: mask\np1: public\n",
        &c,
    )
    .unwrap();
    let monomials = l.input_monomials(&c).unwrap();
    let s_m = &monomials[&c.net("s_m").unwrap()];
    let m_s = &monomials[&c.net("m_s").unwrap()];
    assert_eq!(s_m.vars().count(), 2);
    assert_eq!(m_s.vars().count(), 1);
    assert!(s_m.vars().any(|v| m_s.vars().any(|w| v == w)));
}

#[test]
fn arity_mismatch_rejected() {
    let err = parse_netlist("input a ;\nwire y = AND a ;").unwrap_err();
    assert_eq!(err.line, 2);
    assert!(err.msg.contains("2 operands"), "{}", err.msg);
}

#[test]
fn duplicate_net_rejected() {
    let err = parse_netlist("input a ;\ninput a ;").unwrap_err();
    assert!(err.msg.contains("duplicate"), "{}", err.msg);
}

#[test]
fn undeclared_operand_rejected() {
    let err = parse_netlist("input a ;\nwire y = AND a ghost ;\noutput y ;").unwrap_err();
    assert_eq!((err.line, err.col), (2, 16));
    assert!(err.msg.contains("undeclared net `ghost`"), "{}", err.msg);
}

#[test]
fn combinational_cycle_rejected() {
    let err = parse_netlist("wire x = BUF y ;\nwire y = BUF x ;").unwrap_err();
    assert!(err.msg.contains("cycle"), "{}", err.msg);
}

#[test]
fn syntax_error_carries_position() {
    let err = parse_netlist("input a ;\nwire y == AND a a ;").unwrap_err();
    assert_eq!(err.line, 2);
    assert!(err.col > 1);
}

#[test]
fn unknown_kind_rejected() {
    let err = parse_netlist("input a ;\nwire y = XOR3 a a a ;").unwrap_err();
    assert!(err.msg.contains("unknown gate kind"), "{}", err.msg);
}

#[test]
fn reg_keyword_required_for_registers() {
    assert!(parse_netlist("input a ;\nwire y = REG a ;").is_err());
    let c = parse_netlist("input a ;\nreg y = REG a ;\noutput y ;").unwrap();
    assert_eq!(c.node(c.net("y").unwrap()).kind, GateKind::Reg);
}

#[test]
fn forward_references_resolve() {
    let c = parse_netlist("input a ;\nreg r = REG y ;\nwire y = NOT a ;\noutput r ;").unwrap();
    assert_eq!(c.node(c.net("r").unwrap()).ops, [c.net("y").unwrap()]);
}

#[test]
fn mux_binding_value_checked() {
    let src = "input a ;\ninput b ;\ninput s ;\nwire m = MUX a b s ;\noutput m ;\n\
               fsm { state S0 { active: m ; mux m = 2 ; } }";
    let err = parse_netlist(src).unwrap_err();
    assert!(err.msg.contains("0 or 1"), "{}", err.msg);
}

fn fixtures() -> Vec<(String, maskverif_core::Circuit, maskverif_core::label::Labeling)> {
    let mut out = Vec::new();
    for spec in list() {
        let (c, l) = generate(spec.name, false, None).unwrap();
        out.push((spec.name.to_string(), c, l));
    }
    let (c, l) = generate("cascade-dom", true, None).unwrap();
    out.push(("cascade-dom-flawed".to_string(), c, l));
    out
}

#[test]
fn parse_dump_is_identity_on_benches() {
    for (name, c, _) in fixtures() {
        let text = dump_netlist(&c);
        let parsed = parse_netlist(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parsed, c, "{name}: reparse differs");
        assert_eq!(dump_netlist(&parsed), text, "{name}: dump not canonical");
    }
}

#[test]
fn label_dump_is_identity_on_benches() {
    for (name, c, l) in fixtures() {
        let text = dump_labels(&l, &c);
        let parsed = parse_labels(&text, &c).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(dump_labels(&parsed, &c), text, "{name}: label dump not canonical");
        for &input in c.inputs() {
            match (l.role(input), parsed.role(input)) {
                (Some(Role::Share { index: i1, .. }), Some(Role::Share { index: i2, .. })) => {
                    assert_eq!(i1, i2, "{name}: share index changed")
                }
                (a, b) => assert_eq!(a, b, "{name}: role changed on {}", c.name(input)),
            }
        }
    }
}

#[test]
fn json_import_matches_text_parse() {
    let text = "input a ; input b ; wire y = AND a b ; output y ;";
    let json = r#"{"inputs":["a","b"],"outputs":["y"],"nodes":[{"id":"y","kind":"AND","ops":["a","b"]}]}"#;
    assert_eq!(import_structural_json(json).unwrap(), parse_netlist(text).unwrap());
}

#[test]
fn json_rejects_unknown_kind() {
    let json = r#"{"inputs":["a"],"outputs":[],"nodes":[{"id":"y","kind":"XOR3","ops":["a","a","a"]}]}"#;
    let err = import_structural_json(json).unwrap_err();
    assert!(err.msg.contains("unknown gate kind `XOR3`"), "{}", err.msg);
}

#[test]
fn json_roundtrip_is_identity_on_benches() {
    for (name, c, _) in fixtures() {
        let doc = export_structural_json(&c);
        let back = import_structural_json(&doc).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(back, c, "{name}: reimport differs");
        assert_eq!(
            dump_netlist(&back),
            dump_netlist(&c),
            "{name}: canonical dump differs after JSON roundtrip"
        );
    }
}

#[test]
fn label_errors_are_reported() {
    let c = parse_netlist(EXAMPLE).unwrap();
    let ok = "s_m: share 1 of s\nm_s: share 2 of s\nm1: mask\np1: public\n";
    assert!(parse_labels(ok, &c).is_ok());
    let unknown = format!("{ok}zz: mask\n");
    assert!(parse_labels(&unknown, &c).unwrap_err().msg.contains("unknown net"));
    let duplicate = format!("{ok}p1: mask\n");
    assert!(parse_labels(&duplicate, &c).unwrap_err().msg.contains("already labeled"));
    let missing = "s_m: share 1 of s\nm_s: share 2 of s\nm1: mask\n";
    assert!(parse_labels(missing, &c).is_err());
    let dup_share = "s_m: share 1 of s\nm_s: share 1 of s\nm1: mask\np1: public\n";
    assert!(parse_labels(dup_share, &c).is_err());
}

#[test]
fn gapped_share_family_reads_as_restriction() {
    let c = parse_netlist("input a1 ;\ninput r ;\nwire y = XOR a1 r ;\noutput y ;").unwrap();
    let l = parse_labels("a1: share 2 of a\nr: mask\n", &c).unwrap();
    let im = l.input_monomials(&c).unwrap();
    let a1 = &im[&c.net("a1").unwrap()];
    assert_eq!(a1.vars().count(), 1);
    assert!(!a1.has_secret(), "a lone upper share carries no bare secret");
}

// Dumped per-state label files reparse, and reparse faithfully whenever
// the highest share index of every secret survives in the sub-design
// (the text format cannot say "share 2 exists elsewhere" when only
// share 1 is present; such states stay parseable but read stricter).
#[test]
fn dumped_state_labels_reparse() {
    for spec in list().iter().filter(|s| s.states > 0) {
        let (c, l) = generate(spec.name, false, None).unwrap();
        for sub in maskverif_core::split_all(&c, &l).unwrap() {
            let text = dump_labels(&sub.labeling, &sub.circuit);
            let reparsed = parse_labels(&text, &sub.circuit)
                .unwrap_or_else(|e| panic!("{} {}: {e}", spec.name, sub.state));
            let counts = sub.labeling.share_counts();
            let faithful = counts.iter().all(|(&secret, &count)| {
                sub.labeling
                    .roles()
                    .filter_map(|(_, r)| match r {
                        Role::Share { secret: s, index } if *s == secret => Some(*index),
                        _ => None,
                    })
                    .max()
                    .is_none_or(|max| max == count)
            });
            if faithful {
                for model in [maskverif_core::Model::Stable, maskverif_core::Model::Transient] {
                    let a = maskverif_core::verify(
                        &sub.circuit, &sub.labeling, model, 1,
                        maskverif_core::DEFAULT_SET_CAP,
                    )
                    .unwrap();
                    let b = maskverif_core::verify(
                        &sub.circuit, &reparsed, model, 1,
                        maskverif_core::DEFAULT_SET_CAP,
                    )
                    .unwrap();
                    assert_eq!(
                        a.secure(),
                        b.secure(),
                        "{} {}: verdict changed across label dump",
                        spec.name,
                        sub.state
                    );
                }
            }
        }
    }
}

#[test]
fn flawed_cascade_differs_only_in_rewiring() {
    let (base, _) = generate("cascade-dom", false, Some(2)).unwrap();
    let refresh = base.net("g2n01").unwrap();
    let combine = base.net("y0").unwrap();
    let flawed = inject_reassociation(&base, refresh, combine).unwrap();
    assert_eq!(base.len(), flawed.len());
    let changed: Vec<&str> = base
        .nodes()
        .filter(|&(id, node)| flawed.node(id) != node)
        .map(|(id, _)| base.name(id))
        .collect();
    assert_eq!(changed, ["g2n01", "y0"]);
    let (generated, _) = generate("cascade-dom", true, None).unwrap();
    assert_eq!(flawed, generated);
}
