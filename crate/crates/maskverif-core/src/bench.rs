//! Built-in benchmark circuits with their share labelings.
//!
//! Every generator is deterministic: the same name and options always
//! produce the same nodes in the same order, so serialized output is
//! byte-stable across runs. Each fixture models a controller/datapath
//! design the way an HLS flow would emit it: per-state operator
//! instances, operand muxes where a unit is shared across states, and
//! registers at state boundaries.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::circuit::{Circuit, CircuitBuilder, FsmSchedule, FsmState, GateKind, NetId};
use crate::label::{Labeling, Role};

/// PRESENT S-box, x0 = least significant input bit.
pub const PRESENT_SBOX: [u8; 16] = [
    0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2,
];

/// Masking scheme a fixture instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Dom,
    Hpc1,
    Hpc2,
    Comar,
}

/// Overall shape of a fixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    /// Hand-sized circuit used throughout the documentation.
    Example,
    /// One masked AND gadget (the four RTL variants).
    SingleGadget,
    /// Two masked AND gadgets composed as (a*b)*d.
    Cascade,
    /// Full 4-bit PRESENT S-box datapath.
    PresentSbox,
}

/// Catalog entry for one generator.
#[derive(Debug, Clone, Copy)]
pub struct BenchSpec {
    pub name: &'static str,
    pub scheme: Option<Scheme>,
    pub topology: Topology,
    /// FSM states in the default configuration; 0 for purely
    /// combinational fixtures.
    pub states: usize,
    /// Whether gadget-internal registers are present.
    pub registered: bool,
    /// Accepts the reassociation flaw injection.
    pub supports_flaw: bool,
    /// Alternate state count accepted via the `states` option.
    pub alt_states: Option<usize>,
    pub summary: &'static str,
}

const CATALOG: &[BenchSpec] = &[
    BenchSpec {
        name: "worked-example",
        scheme: None,
        topology: Topology::Example,
        states: 0,
        registered: false,
        supports_flaw: false,
        alt_states: None,
        summary: "3-gate share/mask/public mix; transient leak at G3",
    },
    BenchSpec {
        name: "dom-v1",
        scheme: Some(Scheme::Dom),
        topology: Topology::SingleGadget,
        states: 0,
        registered: false,
        supports_flaw: false,
        alt_states: None,
        summary: "unregistered DOM AND; stable-secure, transient-insecure",
    },
    BenchSpec {
        name: "dom-v2",
        scheme: Some(Scheme::Dom),
        topology: Topology::SingleGadget,
        states: 0,
        registered: true,
        supports_flaw: false,
        alt_states: None,
        summary: "registered DOM AND; secure in both models",
    },
    BenchSpec {
        name: "dom-v3",
        scheme: Some(Scheme::Dom),
        topology: Topology::SingleGadget,
        states: 2,
        registered: false,
        supports_flaw: false,
        alt_states: None,
        summary: "DOM AND time-shared on 2 mult units, no pipeline regs",
    },
    BenchSpec {
        name: "dom-v4",
        scheme: Some(Scheme::Dom),
        topology: Topology::SingleGadget,
        states: 2,
        registered: true,
        supports_flaw: false,
        alt_states: None,
        summary: "DOM AND time-shared on 2 mult units with pipeline regs",
    },
    BenchSpec {
        name: "cascade-dom",
        scheme: Some(Scheme::Dom),
        topology: Topology::Cascade,
        states: 4,
        registered: true,
        supports_flaw: true,
        alt_states: Some(2),
        summary: "(a*b)*d over shared mult units, 4-state schedule",
    },
    BenchSpec {
        name: "cascade-hpc1",
        scheme: Some(Scheme::Hpc1),
        topology: Topology::Cascade,
        states: 3,
        registered: true,
        supports_flaw: false,
        alt_states: Some(4),
        summary: "(a*b)*d with operand refresh, shared combine unit",
    },
    BenchSpec {
        name: "cascade-hpc2",
        scheme: Some(Scheme::Hpc2),
        topology: Topology::Cascade,
        states: 3,
        registered: true,
        supports_flaw: false,
        alt_states: None,
        summary: "(a*b)*d with full input and cross-stage refresh",
    },
    BenchSpec {
        name: "cascade-comar",
        scheme: Some(Scheme::Comar),
        topology: Topology::Cascade,
        states: 4,
        registered: true,
        supports_flaw: false,
        alt_states: None,
        summary: "(a*b)*d with input and output refresh per gadget",
    },
    BenchSpec {
        name: "present-dom",
        scheme: Some(Scheme::Dom),
        topology: Topology::PresentSbox,
        states: 2,
        registered: true,
        supports_flaw: false,
        alt_states: None,
        summary: "PRESENT S-box, 4 DOM gadgets over 2 states",
    },
    BenchSpec {
        name: "present-hpc1",
        scheme: Some(Scheme::Hpc1),
        topology: Topology::PresentSbox,
        states: 2,
        registered: true,
        supports_flaw: false,
        alt_states: None,
        summary: "PRESENT S-box, 4 HPC1 gadgets over 2 states",
    },
];

/// All built-in fixtures in catalog order.
pub fn list() -> &'static [BenchSpec] {
    CATALOG
}

/// Generation failures. All are caller errors; the generators themselves
/// cannot fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenError {
    UnknownBench(String),
    FlawNotApplicable(String),
    BadStates { bench: String, states: usize },
    /// The rewiring target of [`inject_reassociation`] does not have the
    /// refresh-then-combine shape.
    TargetShape(String),
}

impl core::fmt::Display for GenError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GenError::UnknownBench(n) => write!(f, "unknown benchmark `{n}`"),
            GenError::FlawNotApplicable(n) => {
                write!(f, "benchmark `{n}` has no flawed variant")
            }
            GenError::BadStates { bench, states } => {
                write!(f, "benchmark `{bench}` has no {states}-state variant")
            }
            GenError::TargetShape(why) => write!(f, "target structure not found: {why}"),
        }
    }
}

/// Generate a fixture by catalog name.
///
/// `flawed` applies the reassociation injection (cascade-dom only).
/// `states` selects an alternate schedule where the catalog offers one.
pub fn generate(
    name: &str,
    flawed: bool,
    states: Option<usize>,
) -> Result<(Circuit, Labeling), GenError> {
    let spec = CATALOG
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| GenError::UnknownBench(name.into()))?;
    if flawed && !spec.supports_flaw {
        return Err(GenError::FlawNotApplicable(name.into()));
    }
    if let Some(n) = states {
        if n != spec.states && spec.alt_states != Some(n) {
            return Err(GenError::BadStates { bench: name.into(), states: n });
        }
    }
    let alt = states.is_some() && states != Some(spec.states);
    Ok(match name {
        "worked-example" => worked_example(),
        "dom-v1" => dom_v1(),
        "dom-v2" => dom_v2(),
        "dom-v3" => dom_v3(false),
        "dom-v4" => dom_v3(true),
        "cascade-dom" => {
            if flawed {
                cascade_dom_flawed()
            } else if alt {
                cascade_dom_2state()
            } else {
                cascade_dom()
            }
        }
        "cascade-hpc1" => {
            if alt {
                cascade_hpc1_4state()
            } else {
                cascade_hpc1()
            }
        }
        "cascade-hpc2" => cascade_hpc2(),
        "cascade-comar" => cascade_comar(),
        "present-dom" => present_sbox(Scheme::Dom),
        "present-hpc1" => present_sbox(Scheme::Hpc1),
        _ => unreachable!("catalog entry without generator"),
    })
}

/// Rewire a refresh-then-combine pair so the mask is applied after the
/// register instead of before it.
///
/// Expected input shape: `refresh = XOR(cross, r)` with `r` a primary
/// input, and `combine = XOR(inner, u)` where `u` is either `refresh`
/// itself or a REG of it. Output shape: `refresh = XOR(inner, cross)`,
/// `combine = XOR(u, r)`. Both nets keep their ids, names, and schedule
/// slots, and the design's input/output behavior is unchanged.
pub fn inject_reassociation(
    c: &Circuit,
    refresh: NetId,
    combine: NetId,
) -> Result<Circuit, GenError> {
    let rn = c.node(refresh);
    let cn = c.node(combine);
    if rn.kind != GateKind::Xor || cn.kind != GateKind::Xor {
        return Err(GenError::TargetShape("both nets must be XOR".into()));
    }
    let is_input = |id: NetId| c.node(id).kind == GateKind::Input;
    let r = if is_input(rn.ops[0]) && !is_input(rn.ops[1]) {
        rn.ops[0]
    } else if is_input(rn.ops[1]) && !is_input(rn.ops[0]) {
        rn.ops[1]
    } else {
        return Err(GenError::TargetShape(
            "refresh must XOR exactly one primary input".into(),
        ));
    };
    let cross = if rn.ops[0] == r { rn.ops[1] } else { rn.ops[0] };
    let feeds_refresh = |id: NetId| {
        id == refresh || (c.node(id).kind == GateKind::Reg && c.node(id).ops[0] == refresh)
    };
    let u = if feeds_refresh(cn.ops[0]) && !feeds_refresh(cn.ops[1]) {
        cn.ops[0]
    } else if feeds_refresh(cn.ops[1]) && !feeds_refresh(cn.ops[0]) {
        cn.ops[1]
    } else {
        return Err(GenError::TargetShape(
            "combine must XOR the refresh (or its REG) with one other net".into(),
        ));
    };
    let inner = if cn.ops[0] == u { cn.ops[1] } else { cn.ops[0] };
    let mut edits = BTreeMap::new();
    edits.insert(refresh, [inner, cross]);
    edits.insert(combine, [u, r]);
    Ok(rewire(c, &edits))
}

/// Rebuild a circuit with some 2-input nodes' operands replaced. Ids,
/// names, outputs, and the schedule are preserved.
fn rewire(c: &Circuit, edits: &BTreeMap<NetId, [NetId; 2]>) -> Circuit {
    let mut b = CircuitBuilder::new();
    for (id, n) in c.nodes() {
        b.add(c.name(id), n.kind).expect("names unique in source circuit");
        let ops = match edits.get(&id) {
            Some(e) => e.to_vec(),
            None => n.ops.clone(),
        };
        b.set_ops(id, ops).expect("operand list fits the node");
    }
    for &o in c.outputs() {
        b.output(o);
    }
    if let Some(f) = c.fsm() {
        b.set_fsm(f.clone());
    }
    b.finish().expect("rewired circuit stays well formed")
}

// State accumulator used by the generators. Collects per-state op lists
// and mux bindings while nodes are appended to the builder.
struct St {
    name: String,
    active: Vec<NetId>,
    regs: Vec<NetId>,
    bind: BTreeMap<NetId, bool>,
}

impl St {
    fn new(name: &str) -> St {
        St { name: name.into(), active: Vec::new(), regs: Vec::new(), bind: BTreeMap::new() }
    }

    fn into_state(self) -> FsmState {
        FsmState {
            name: self.name,
            active: self.active,
            reg_writes: self.regs,
            mux_bindings: self.bind,
        }
    }
}

fn gate(b: &mut CircuitBuilder, st: &mut St, name: &str, kind: GateKind, ops: &[NetId]) -> NetId {
    let id = b.node(name, kind, ops).expect("generator names are unique");
    st.active.push(id);
    id
}

fn reg(b: &mut CircuitBuilder, st: &mut St, name: &str, op: NetId) -> NetId {
    let id = b.node(name, GateKind::Reg, &[op]).expect("generator names are unique");
    st.regs.push(id);
    id
}

fn input(b: &mut CircuitBuilder, name: &str) -> NetId {
    b.input(name).expect("generator names are unique")
}

fn mux(b: &mut CircuitBuilder, name: &str, lo: NetId, hi: NetId, sel: NetId) -> NetId {
    b.node(name, GateKind::Mux, &[lo, hi, sel]).expect("generator names are unique")
}

fn finish(b: CircuitBuilder, states: Vec<St>, outputs: &[NetId]) -> Circuit {
    let mut b = b;
    for &o in outputs {
        b.output(o);
    }
    if !states.is_empty() {
        b.set_fsm(FsmSchedule { states: states.into_iter().map(St::into_state).collect() });
    }
    b.finish().expect("generated circuit is well formed")
}

fn share2(l: &mut Labeling, secret: &str, s0: NetId, s1: NetId) {
    let id = l.secret_id(secret);
    l.assign(s0, Role::Share { secret: id, index: 1 });
    l.assign(s1, Role::Share { secret: id, index: 2 });
}

/// One DOM AND stage: four partial products, fresh-mask XOR on the two
/// cross-domain terms, a register per summand, and the two same-domain
/// combines. Returns the combine nets `(<pfx>c0, <pfx>c1)`.
fn dom_core(
    b: &mut CircuitBuilder,
    st: &mut St,
    pfx: &str,
    a0: NetId,
    a1: NetId,
    b0: NetId,
    b1: NetId,
    z: NetId,
) -> (NetId, NetId) {
    let p00 = gate(b, st, &format!("{pfx}p00"), GateKind::And, &[a0, b0]);
    let p01 = gate(b, st, &format!("{pfx}p01"), GateKind::And, &[a0, b1]);
    let p10 = gate(b, st, &format!("{pfx}p10"), GateKind::And, &[a1, b0]);
    let p11 = gate(b, st, &format!("{pfx}p11"), GateKind::And, &[a1, b1]);
    let n01 = gate(b, st, &format!("{pfx}n01"), GateKind::Xor, &[p01, z]);
    let n10 = gate(b, st, &format!("{pfx}n10"), GateKind::Xor, &[p10, z]);
    let rp00 = reg(b, st, &format!("{pfx}rp00"), p00);
    let rn01 = reg(b, st, &format!("{pfx}rn01"), n01);
    let rn10 = reg(b, st, &format!("{pfx}rn10"), n10);
    let rp11 = reg(b, st, &format!("{pfx}rp11"), p11);
    let c0 = gate(b, st, &format!("{pfx}c0"), GateKind::Xor, &[rp00, rn01]);
    let c1 = gate(b, st, &format!("{pfx}c1"), GateKind::Xor, &[rp11, rn10]);
    (c0, c1)
}

/// Share refresh: XOR the same fresh mask onto both shares and register
/// the results. Returns the registered shares.
fn refresh2(
    b: &mut CircuitBuilder,
    st: &mut St,
    pfx: &str,
    x0: NetId,
    x1: NetId,
    r: NetId,
) -> (NetId, NetId) {
    let w0 = gate(b, st, &format!("{pfx}w0"), GateKind::Xor, &[x0, r]);
    let w1 = gate(b, st, &format!("{pfx}w1"), GateKind::Xor, &[x1, r]);
    let r0 = reg(b, st, &format!("{pfx}r0"), w0);
    let r1 = reg(b, st, &format!("{pfx}r1"), w1);
    (r0, r1)
}

fn worked_example() -> (Circuit, Labeling) {
    let mut b = CircuitBuilder::new();
    let s_m = input(&mut b, "s_m");
    let m_s = input(&mut b, "m_s");
    let m1 = input(&mut b, "m1");
    let p1 = input(&mut b, "p1");
    let mut st = St::new("comb");
    let g1 = gate(&mut b, &mut st, "G1", GateKind::Xor, &[s_m, m1]);
    let g2 = gate(&mut b, &mut st, "G2", GateKind::And, &[m_s, p1]);
    let g3 = gate(&mut b, &mut st, "G3", GateKind::Xor, &[g1, g2]);
    let c = finish(b, Vec::new(), &[g3]);
    let mut l = Labeling::new();
    share2(&mut l, "s", s_m, m_s);
    l.assign(m1, Role::Mask);
    l.assign(p1, Role::Public);
    (c, l)
}

fn dom_v1() -> (Circuit, Labeling) {
    let mut b = CircuitBuilder::new();
    let a0 = input(&mut b, "a0");
    let a1 = input(&mut b, "a1");
    let b0 = input(&mut b, "b0");
    let b1 = input(&mut b, "b1");
    let z = input(&mut b, "z");
    let mut st = St::new("comb");
    let p1 = gate(&mut b, &mut st, "p1", GateKind::And, &[a0, b0]);
    let p2 = gate(&mut b, &mut st, "p2", GateKind::And, &[a0, b1]);
    let p3 = gate(&mut b, &mut st, "p3", GateKind::And, &[a1, b0]);
    let p4 = gate(&mut b, &mut st, "p4", GateKind::And, &[a1, b1]);
    let i1 = gate(&mut b, &mut st, "i1", GateKind::Xor, &[p2, z]);
    let i2 = gate(&mut b, &mut st, "i2", GateKind::Xor, &[p3, z]);
    let y0 = gate(&mut b, &mut st, "y0", GateKind::Xor, &[i1, p1]);
    let y1 = gate(&mut b, &mut st, "y1", GateKind::Xor, &[i2, p4]);
    let c = finish(b, Vec::new(), &[y0, y1]);
    let mut l = Labeling::new();
    share2(&mut l, "a", a0, a1);
    share2(&mut l, "b", b0, b1);
    l.assign(z, Role::Mask);
    (c, l)
}

fn dom_v2() -> (Circuit, Labeling) {
    let mut b = CircuitBuilder::new();
    let a0 = input(&mut b, "a0");
    let a1 = input(&mut b, "a1");
    let b0 = input(&mut b, "b0");
    let b1 = input(&mut b, "b1");
    let z = input(&mut b, "z");
    let mut st = St::new("comb");
    let p1 = gate(&mut b, &mut st, "p1", GateKind::And, &[a0, b0]);
    let p2 = gate(&mut b, &mut st, "p2", GateKind::And, &[a0, b1]);
    let p3 = gate(&mut b, &mut st, "p3", GateKind::And, &[a1, b0]);
    let p4 = gate(&mut b, &mut st, "p4", GateKind::And, &[a1, b1]);
    let i1 = gate(&mut b, &mut st, "i1", GateKind::Xor, &[p2, z]);
    let i2 = gate(&mut b, &mut st, "i2", GateKind::Xor, &[p3, z]);
    let rp1 = reg(&mut b, &mut st, "rp1", p1);
    let ri1 = reg(&mut b, &mut st, "ri1", i1);
    let ri2 = reg(&mut b, &mut st, "ri2", i2);
    let rp4 = reg(&mut b, &mut st, "rp4", p4);
    let y0 = gate(&mut b, &mut st, "y0", GateKind::Xor, &[rp1, ri1]);
    let y1 = gate(&mut b, &mut st, "y1", GateKind::Xor, &[ri2, rp4]);
    let c = finish(b, Vec::new(), &[y0, y1]);
    let mut l = Labeling::new();
    share2(&mut l, "a", a0, a1);
    share2(&mut l, "b", b0, b1);
    l.assign(z, Role::Mask);
    (c, l)
}

/// dom-v3 (`piped = false`) and dom-v4 (`piped = true`): the v1/v2
/// datapaths folded onto two AND units with a 2-state schedule. State 0
/// produces the share-1 output, state 1 the share-0 output.
fn dom_v3(piped: bool) -> (Circuit, Labeling) {
    let mut b = CircuitBuilder::new();
    let a0 = input(&mut b, "a0");
    let a1 = input(&mut b, "a1");
    let b0 = input(&mut b, "b0");
    let b1 = input(&mut b, "b1");
    let z = input(&mut b, "z");
    let sel = input(&mut b, "st");
    let ma = mux(&mut b, "ma", a1, a0, sel);
    let mbi = mux(&mut b, "mbi", b1, b0, sel);
    let mbx = mux(&mut b, "mbx", b0, b1, sel);
    let mut outs = [a0; 2];
    let mut states = Vec::new();
    for k in 0..2usize {
        let mut st = St::new(&format!("S{k}"));
        for m in [ma, mbi, mbx] {
            st.bind.insert(m, k == 1);
        }
        let qi = gate(&mut b, &mut st, &format!("s{k}qi"), GateKind::And, &[ma, mbi]);
        let qx = gate(&mut b, &mut st, &format!("s{k}qx"), GateKind::And, &[ma, mbx]);
        let ix = gate(&mut b, &mut st, &format!("s{k}ix"), GateKind::Xor, &[qx, z]);
        let yc = if piped {
            let rqi = reg(&mut b, &mut st, &format!("s{k}rqi"), qi);
            let rix = reg(&mut b, &mut st, &format!("s{k}rix"), ix);
            gate(&mut b, &mut st, &format!("s{k}yc"), GateKind::Xor, &[rqi, rix])
        } else {
            gate(&mut b, &mut st, &format!("s{k}yc"), GateKind::Xor, &[qi, ix])
        };
        let share = 1 - k;
        outs[share] = reg(&mut b, &mut st, &format!("y{share}"), yc);
        states.push(st);
    }
    let c = finish(b, states, &[outs[0], outs[1]]);
    let mut l = Labeling::new();
    share2(&mut l, "a", a0, a1);
    share2(&mut l, "b", b0, b1);
    l.assign(z, Role::Mask);
    l.assign(sel, Role::Public);
    (c, l)
}

/// Two DOM gadgets computing (a*b)*d, each gadget time-multiplexed onto
/// one shared pair of mult units across two share-half states: states
/// 0/1 run gadget 1 (share 1 first), states 2/3 run gadget 2 on the
/// registered gadget-1 result. `st_sh` selects the share half.
fn cascade_dom() -> (Circuit, Labeling) {
    let mut b = CircuitBuilder::new();
    let a0 = input(&mut b, "a0");
    let a1 = input(&mut b, "a1");
    let b0 = input(&mut b, "b0");
    let b1 = input(&mut b, "b1");
    let d0 = input(&mut b, "d0");
    let d1 = input(&mut b, "d1");
    let r0 = input(&mut b, "r0");
    let r1 = input(&mut b, "r1");
    let st_sh = input(&mut b, "st_sh");

    // Gadget-1 result registers, declared up front so the gadget-2
    // operand mux can name them before their drivers exist.
    let rc0 = b.add("rc0", GateKind::Reg).expect("generator names are unique");
    let rc1 = b.add("rc1", GateKind::Reg).expect("generator names are unique");

    let mal = mux(&mut b, "mal", a1, a0, st_sh);
    let mbr = mux(&mut b, "mbr", b1, b0, st_sh);
    let mnr = mux(&mut b, "mnr", b0, b1, st_sh);
    let mcl = mux(&mut b, "mcl", rc1, rc0, st_sh);
    let mdr = mux(&mut b, "mdr", d1, d0, st_sh);
    let mdx = mux(&mut b, "mdx", d0, d1, st_sh);
    let muxes = [mal, mbr, mnr, mcl, mdr, mdx];

    let mut outs = [a0; 2];
    let mut states = Vec::new();
    for k in 0..4usize {
        let mut st = St::new(&format!("S{k}"));
        for m in muxes {
            st.bind.insert(m, k % 2 == 1);
        }
        let (left, inner, cross, z) =
            if k < 2 { (mal, mbr, mnr, r0) } else { (mcl, mdr, mdx, r1) };
        let xp = gate(&mut b, &mut st, &format!("s{k}xp"), GateKind::And, &[left, inner]);
        let np = gate(&mut b, &mut st, &format!("s{k}np"), GateKind::And, &[left, cross]);
        let nf = gate(&mut b, &mut st, &format!("s{k}nf"), GateKind::Xor, &[np, z]);
        let rx = reg(&mut b, &mut st, &format!("s{k}rx"), xp);
        let rn = reg(&mut b, &mut st, &format!("s{k}rn"), nf);
        let share = (k + 1) % 2;
        if k < 2 {
            let cmb = gate(&mut b, &mut st, &format!("c{share}"), GateKind::Xor, &[rx, rn]);
            let creg = if share == 0 { rc0 } else { rc1 };
            b.set_ops(creg, alloc::vec![cmb]).expect("operand list fits the node");
            st.regs.push(creg);
        } else {
            outs[share] = gate(&mut b, &mut st, &format!("y{share}"), GateKind::Xor, &[rx, rn]);
        }
        states.push(st);
    }
    let c = finish(b, states, &[outs[0], outs[1]]);
    let mut l = Labeling::new();
    share2(&mut l, "a", a0, a1);
    share2(&mut l, "b", b0, b1);
    share2(&mut l, "d", d0, d1);
    l.assign(r0, Role::Mask);
    l.assign(r1, Role::Mask);
    l.assign(st_sh, Role::Public);
    (c, l)
}

/// Straight 2-state DOM cascade without unit sharing; the substrate the
/// reassociation flaw is injected into. Gadget 2 keeps the unregistered
/// same-domain terms of dom-v1 so the flawed product reaches the output.
fn cascade_dom_2state() -> (Circuit, Labeling) {
    let mut b = CircuitBuilder::new();
    let a0 = input(&mut b, "a0");
    let a1 = input(&mut b, "a1");
    let b0 = input(&mut b, "b0");
    let b1 = input(&mut b, "b1");
    let d0 = input(&mut b, "d0");
    let d1 = input(&mut b, "d1");
    let r1 = input(&mut b, "r1");
    let r2 = input(&mut b, "r2");

    let mut s0 = St::new("S0");
    let (c0, c1) = dom_core(&mut b, &mut s0, "g1", a0, a1, b0, b1, r1);
    let rc0 = reg(&mut b, &mut s0, "rc0", c0);
    let rc1 = reg(&mut b, &mut s0, "rc1", c1);

    let mut s1 = St::new("S1");
    let p00 = gate(&mut b, &mut s1, "g2p00", GateKind::And, &[rc0, d0]);
    let p01 = gate(&mut b, &mut s1, "g2p01", GateKind::And, &[rc0, d1]);
    let p10 = gate(&mut b, &mut s1, "g2p10", GateKind::And, &[rc1, d0]);
    let p11 = gate(&mut b, &mut s1, "g2p11", GateKind::And, &[rc1, d1]);
    let n01 = gate(&mut b, &mut s1, "g2n01", GateKind::Xor, &[p01, r2]);
    let n10 = gate(&mut b, &mut s1, "g2n10", GateKind::Xor, &[p10, r2]);
    let rn01 = reg(&mut b, &mut s1, "g2rn01", n01);
    let rn10 = reg(&mut b, &mut s1, "g2rn10", n10);
    let y0 = gate(&mut b, &mut s1, "y0", GateKind::Xor, &[p00, rn01]);
    let y1 = gate(&mut b, &mut s1, "y1", GateKind::Xor, &[p11, rn10]);

    let c = finish(b, alloc::vec![s0, s1], &[y0, y1]);
    let mut l = Labeling::new();
    share2(&mut l, "a", a0, a1);
    share2(&mut l, "b", b0, b1);
    share2(&mut l, "d", d0, d1);
    l.assign(r1, Role::Mask);
    l.assign(r2, Role::Mask);
    (c, l)
}

fn cascade_dom_flawed() -> (Circuit, Labeling) {
    let (c, l) = cascade_dom_2state();
    let refresh = c.net("g2n01").expect("net exists");
    let combine = c.net("y0").expect("net exists");
    let c = inject_reassociation(&c, refresh, combine).expect("substrate matches");
    (c, l)
}

/// HPC1 cascade: refresh b and d with one fresh mask each (state 0),
/// then two DOM stages. The final combine XOR of gadget 1 is one shared
/// unit, time-multiplexed between states 1 and 2 via operand muxes.
fn cascade_hpc1() -> (Circuit, Labeling) {
    let mut b = CircuitBuilder::new();
    let a0 = input(&mut b, "a0");
    let a1 = input(&mut b, "a1");
    let b0 = input(&mut b, "b0");
    let b1 = input(&mut b, "b1");
    let d0 = input(&mut b, "d0");
    let d1 = input(&mut b, "d1");
    let rb = input(&mut b, "rb");
    let rd = input(&mut b, "rd");
    let z1 = input(&mut b, "z1");
    let z2 = input(&mut b, "z2");
    let stc = input(&mut b, "stc");

    let mut s0 = St::new("S0");
    let (rb0, rb1) = refresh2(&mut b, &mut s0, "fb", b0, b1, rb);
    let (rd0, rd1) = refresh2(&mut b, &mut s0, "fd", d0, d1, rd);

    let mut s1 = St::new("S1");
    let p00 = gate(&mut b, &mut s1, "g1p00", GateKind::And, &[a0, rb0]);
    let p01 = gate(&mut b, &mut s1, "g1p01", GateKind::And, &[a0, rb1]);
    let p10 = gate(&mut b, &mut s1, "g1p10", GateKind::And, &[a1, rb0]);
    let p11 = gate(&mut b, &mut s1, "g1p11", GateKind::And, &[a1, rb1]);
    let n01 = gate(&mut b, &mut s1, "g1n01", GateKind::Xor, &[p01, z1]);
    let n10 = gate(&mut b, &mut s1, "g1n10", GateKind::Xor, &[p10, z1]);
    let rn01 = reg(&mut b, &mut s1, "g1rn01", n01);
    let rn10 = reg(&mut b, &mut s1, "g1rn10", n10);
    let rp11 = reg(&mut b, &mut s1, "g1rp11", p11);
    let mcl = mux(&mut b, "mcl", p00, rp11, stc);
    let mcr = mux(&mut b, "mcr", rn01, rn10, stc);
    s1.bind.insert(mcl, false);
    s1.bind.insert(mcr, false);
    let c0 = gate(&mut b, &mut s1, "c0", GateKind::Xor, &[mcl, mcr]);
    let rc0 = reg(&mut b, &mut s1, "rc0", c0);

    let mut s2 = St::new("S2");
    s2.bind.insert(mcl, true);
    s2.bind.insert(mcr, true);
    let c1 = gate(&mut b, &mut s2, "c1", GateKind::Xor, &[mcl, mcr]);
    let q00 = gate(&mut b, &mut s2, "g2p00", GateKind::And, &[rc0, rd0]);
    let q01 = gate(&mut b, &mut s2, "g2p01", GateKind::And, &[rc0, rd1]);
    let q10 = gate(&mut b, &mut s2, "g2p10", GateKind::And, &[c1, rd0]);
    let q11 = gate(&mut b, &mut s2, "g2p11", GateKind::And, &[c1, rd1]);
    let m01 = gate(&mut b, &mut s2, "g2n01", GateKind::Xor, &[q01, z2]);
    let m10 = gate(&mut b, &mut s2, "g2n10", GateKind::Xor, &[q10, z2]);
    let rq00 = reg(&mut b, &mut s2, "g2rp00", q00);
    let rm01 = reg(&mut b, &mut s2, "g2rn01", m01);
    let rm10 = reg(&mut b, &mut s2, "g2rn10", m10);
    let rq11 = reg(&mut b, &mut s2, "g2rp11", q11);
    let y0 = gate(&mut b, &mut s2, "y0", GateKind::Xor, &[rq00, rm01]);
    let y1 = gate(&mut b, &mut s2, "y1", GateKind::Xor, &[rq11, rm10]);

    let c = finish(b, alloc::vec![s0, s1, s2], &[y0, y1]);
    let mut l = Labeling::new();
    share2(&mut l, "a", a0, a1);
    share2(&mut l, "b", b0, b1);
    share2(&mut l, "d", d0, d1);
    for m in [rb, rd, z1, z2] {
        l.assign(m, Role::Mask);
    }
    l.assign(stc, Role::Public);
    (c, l)
}

/// 4-state HPC1 cascade: the two operand-refresh XOR units are shared
/// across states 0 and 1 (share 1 first), then each gadget gets a full
/// state of its own.
fn cascade_hpc1_4state() -> (Circuit, Labeling) {
    let mut b = CircuitBuilder::new();
    let a0 = input(&mut b, "a0");
    let a1 = input(&mut b, "a1");
    let b0 = input(&mut b, "b0");
    let b1 = input(&mut b, "b1");
    let d0 = input(&mut b, "d0");
    let d1 = input(&mut b, "d1");
    let rb = input(&mut b, "rb");
    let rd = input(&mut b, "rd");
    let z1 = input(&mut b, "z1");
    let z2 = input(&mut b, "z2");
    let st_sh = input(&mut b, "st_sh");

    let mb = mux(&mut b, "mb", b1, b0, st_sh);
    let md = mux(&mut b, "md", d1, d0, st_sh);

    let mut s0 = St::new("S0");
    s0.bind.insert(mb, false);
    s0.bind.insert(md, false);
    let wb_a = gate(&mut b, &mut s0, "s0wb", GateKind::Xor, &[mb, rb]);
    let wd_a = gate(&mut b, &mut s0, "s0wd", GateKind::Xor, &[md, rd]);
    let rb1 = reg(&mut b, &mut s0, "rb1", wb_a);
    let rd1 = reg(&mut b, &mut s0, "rd1", wd_a);

    let mut s1 = St::new("S1");
    s1.bind.insert(mb, true);
    s1.bind.insert(md, true);
    let wb_b = gate(&mut b, &mut s1, "s1wb", GateKind::Xor, &[mb, rb]);
    let wd_b = gate(&mut b, &mut s1, "s1wd", GateKind::Xor, &[md, rd]);
    let rb0 = reg(&mut b, &mut s1, "rb0", wb_b);
    let rd0 = reg(&mut b, &mut s1, "rd0", wd_b);

    let mut s2 = St::new("S2");
    let (c0, c1) = dom_core(&mut b, &mut s2, "g1", a0, a1, rb0, rb1, z1);
    let rc0 = reg(&mut b, &mut s2, "rc0", c0);
    let rc1 = reg(&mut b, &mut s2, "rc1", c1);

    let mut s3 = St::new("S3");
    let (e0, e1) = dom_core(&mut b, &mut s3, "g2", rc0, rc1, rd0, rd1, z2);
    let y0 = gate(&mut b, &mut s3, "y0", GateKind::Buf, &[e0]);
    let y1 = gate(&mut b, &mut s3, "y1", GateKind::Buf, &[e1]);

    let c = finish(b, alloc::vec![s0, s1, s2, s3], &[y0, y1]);
    let mut l = Labeling::new();
    share2(&mut l, "a", a0, a1);
    share2(&mut l, "b", b0, b1);
    share2(&mut l, "d", d0, d1);
    for m in [rb, rd, z1, z2] {
        l.assign(m, Role::Mask);
    }
    l.assign(st_sh, Role::Public);
    (c, l)
}

/// HPC2-style cascade: every gadget input is refreshed (state 0), and
/// the value crossing from gadget 1 to gadget 2 is refreshed again in
/// state 2. Shares the gadget-1 combine unit like [`cascade_hpc1`].
fn cascade_hpc2() -> (Circuit, Labeling) {
    let mut b = CircuitBuilder::new();
    let a0 = input(&mut b, "a0");
    let a1 = input(&mut b, "a1");
    let b0 = input(&mut b, "b0");
    let b1 = input(&mut b, "b1");
    let d0 = input(&mut b, "d0");
    let d1 = input(&mut b, "d1");
    let r1 = input(&mut b, "r1");
    let r2 = input(&mut b, "r2");
    let r3 = input(&mut b, "r3");
    let r4 = input(&mut b, "r4");
    let z1 = input(&mut b, "z1");
    let z2 = input(&mut b, "z2");
    let stc = input(&mut b, "stc");

    let mut s0 = St::new("S0");
    let (ra0, ra1) = refresh2(&mut b, &mut s0, "fa", a0, a1, r1);
    let (rb0, rb1) = refresh2(&mut b, &mut s0, "fb", b0, b1, r2);
    let (rd0, rd1) = refresh2(&mut b, &mut s0, "fd", d0, d1, r4);

    let mut s1 = St::new("S1");
    let p00 = gate(&mut b, &mut s1, "g1p00", GateKind::And, &[ra0, rb0]);
    let p01 = gate(&mut b, &mut s1, "g1p01", GateKind::And, &[ra0, rb1]);
    let p10 = gate(&mut b, &mut s1, "g1p10", GateKind::And, &[ra1, rb0]);
    let p11 = gate(&mut b, &mut s1, "g1p11", GateKind::And, &[ra1, rb1]);
    let n01 = gate(&mut b, &mut s1, "g1n01", GateKind::Xor, &[p01, z1]);
    let n10 = gate(&mut b, &mut s1, "g1n10", GateKind::Xor, &[p10, z1]);
    let rn01 = reg(&mut b, &mut s1, "g1rn01", n01);
    let rn10 = reg(&mut b, &mut s1, "g1rn10", n10);
    let rp11 = reg(&mut b, &mut s1, "g1rp11", p11);
    let mcl = mux(&mut b, "mcl", p00, rp11, stc);
    let mcr = mux(&mut b, "mcr", rn01, rn10, stc);
    s1.bind.insert(mcl, false);
    s1.bind.insert(mcr, false);
    let c0 = gate(&mut b, &mut s1, "c0", GateKind::Xor, &[mcl, mcr]);
    let rc0 = reg(&mut b, &mut s1, "rc0", c0);

    let mut s2 = St::new("S2");
    s2.bind.insert(mcl, true);
    s2.bind.insert(mcr, true);
    let c1 = gate(&mut b, &mut s2, "c1", GateKind::Xor, &[mcl, mcr]);
    let wc0 = gate(&mut b, &mut s2, "wc0", GateKind::Xor, &[rc0, r3]);
    let wc1 = gate(&mut b, &mut s2, "wc1", GateKind::Xor, &[c1, r3]);
    let q00 = gate(&mut b, &mut s2, "g2p00", GateKind::And, &[wc0, rd0]);
    let q01 = gate(&mut b, &mut s2, "g2p01", GateKind::And, &[wc0, rd1]);
    let q10 = gate(&mut b, &mut s2, "g2p10", GateKind::And, &[wc1, rd0]);
    let q11 = gate(&mut b, &mut s2, "g2p11", GateKind::And, &[wc1, rd1]);
    let m01 = gate(&mut b, &mut s2, "g2n01", GateKind::Xor, &[q01, z2]);
    let m10 = gate(&mut b, &mut s2, "g2n10", GateKind::Xor, &[q10, z2]);
    let rq00 = reg(&mut b, &mut s2, "g2rp00", q00);
    let rm01 = reg(&mut b, &mut s2, "g2rn01", m01);
    let rm10 = reg(&mut b, &mut s2, "g2rn10", m10);
    let rq11 = reg(&mut b, &mut s2, "g2rp11", q11);
    let y0 = gate(&mut b, &mut s2, "y0", GateKind::Xor, &[rq00, rm01]);
    let y1 = gate(&mut b, &mut s2, "y1", GateKind::Xor, &[rq11, rm10]);

    let c = finish(b, alloc::vec![s0, s1, s2], &[y0, y1]);
    let mut l = Labeling::new();
    share2(&mut l, "a", a0, a1);
    share2(&mut l, "b", b0, b1);
    share2(&mut l, "d", d0, d1);
    for m in [r1, r2, r3, r4, z1, z2] {
        l.assign(m, Role::Mask);
    }
    l.assign(stc, Role::Public);
    (c, l)
}

/// COMAR-style cascade: refresh every input share (shared refresh units
/// over states 0/1), then a DOM stage plus output refresh per gadget.
fn cascade_comar() -> (Circuit, Labeling) {
    let mut b = CircuitBuilder::new();
    let a0 = input(&mut b, "a0");
    let a1 = input(&mut b, "a1");
    let b0 = input(&mut b, "b0");
    let b1 = input(&mut b, "b1");
    let d0 = input(&mut b, "d0");
    let d1 = input(&mut b, "d1");
    let r1 = input(&mut b, "r1");
    let r2 = input(&mut b, "r2");
    let r3 = input(&mut b, "r3");
    let r4 = input(&mut b, "r4");
    let r5 = input(&mut b, "r5");
    let r6 = input(&mut b, "r6");
    let r7 = input(&mut b, "r7");
    let st_sh = input(&mut b, "st_sh");

    let ma = mux(&mut b, "ma", a1, a0, st_sh);
    let mb = mux(&mut b, "mb", b1, b0, st_sh);
    let md = mux(&mut b, "md", d1, d0, st_sh);

    let mut s0 = St::new("S0");
    for m in [ma, mb, md] {
        s0.bind.insert(m, false);
    }
    let wa_a = gate(&mut b, &mut s0, "s0wa", GateKind::Xor, &[ma, r1]);
    let wb_a = gate(&mut b, &mut s0, "s0wb", GateKind::Xor, &[mb, r2]);
    let wd_a = gate(&mut b, &mut s0, "s0wd", GateKind::Xor, &[md, r3]);
    let ra1 = reg(&mut b, &mut s0, "ra1", wa_a);
    let rb1 = reg(&mut b, &mut s0, "rb1", wb_a);
    let rd1 = reg(&mut b, &mut s0, "rd1", wd_a);

    let mut s1 = St::new("S1");
    for m in [ma, mb, md] {
        s1.bind.insert(m, true);
    }
    let wa_b = gate(&mut b, &mut s1, "s1wa", GateKind::Xor, &[ma, r1]);
    let wb_b = gate(&mut b, &mut s1, "s1wb", GateKind::Xor, &[mb, r2]);
    let wd_b = gate(&mut b, &mut s1, "s1wd", GateKind::Xor, &[md, r3]);
    let ra0 = reg(&mut b, &mut s1, "ra0", wa_b);
    let rb0 = reg(&mut b, &mut s1, "rb0", wb_b);
    let rd0 = reg(&mut b, &mut s1, "rd0", wd_b);

    let mut s2 = St::new("S2");
    let (c0, c1) = dom_core(&mut b, &mut s2, "g1", ra0, ra1, rb0, rb1, r4);
    let wc0 = gate(&mut b, &mut s2, "wc0", GateKind::Xor, &[c0, r5]);
    let wc1 = gate(&mut b, &mut s2, "wc1", GateKind::Xor, &[c1, r5]);
    let rc0 = reg(&mut b, &mut s2, "rc0", wc0);
    let rc1 = reg(&mut b, &mut s2, "rc1", wc1);

    let mut s3 = St::new("S3");
    let (e0, e1) = dom_core(&mut b, &mut s3, "g2", rc0, rc1, rd0, rd1, r6);
    let y0 = gate(&mut b, &mut s3, "y0", GateKind::Xor, &[e0, r7]);
    let y1 = gate(&mut b, &mut s3, "y1", GateKind::Xor, &[e1, r7]);

    let c = finish(b, alloc::vec![s0, s1, s2, s3], &[y0, y1]);
    let mut l = Labeling::new();
    share2(&mut l, "a", a0, a1);
    share2(&mut l, "b", b0, b1);
    share2(&mut l, "d", d0, d1);
    for m in [r1, r2, r3, r4, r5, r6, r7] {
        l.assign(m, Role::Mask);
    }
    l.assign(st_sh, Role::Public);
    (c, l)
}

// PRESENT S-box over a 2-share masking, algebraic normal form used by
// the generators (x0 = lsb of the S-box input, t* are the four AND
// gadget outputs):
//   l1 = 1 + x3          l2 = x1 + x2         l3 = x2 + x3
//   t1 = l1 * l2         t2 = l3 * l2
//   l5 = l3 + t1         l6 = x0 + x2 + t2    l7 = 1 + x2 + t2
//   t3 = l5 * l6         t4 = l7 * l6
//   y0 = x0+x1+x2+x3+t1+t2      y1 = x0+x2+x3+t1+t4
//   y2 = 1+x1+x2+x3+t1+t2+t3    y3 = 1+x3+t1+t2+t4
//
// The l3 XOR pair is one shared unit: state 0 computes its share-0/1
// copies for t2, state 1 recomputes them (operands swapped by the state
// select) for l5 and the output trees. Gadget operands are registered
// before the partial products so probe cones never join both shares of
// a linear term.
fn present_sbox(scheme: Scheme) -> (Circuit, Labeling) {
    assert!(matches!(scheme, Scheme::Dom | Scheme::Hpc1));
    let mut b = CircuitBuilder::new();
    let mut x = Vec::new();
    for i in 0..4 {
        let s0 = input(&mut b, &format!("x{i}_0"));
        let s1 = input(&mut b, &format!("x{i}_1"));
        x.push((s0, s1));
    }
    let z1 = input(&mut b, "z1");
    let z2 = input(&mut b, "z2");
    let z3 = input(&mut b, "z3");
    let z4 = input(&mut b, "z4");
    let refreshers = if scheme == Scheme::Hpc1 {
        let r1 = input(&mut b, "r1");
        let r2 = input(&mut b, "r2");
        let r3 = input(&mut b, "r3");
        let r4 = input(&mut b, "r4");
        Some([r1, r2, r3, r4])
    } else {
        None
    };
    let sel = input(&mut b, "st");

    let muxa = mux(&mut b, "muxa", x[2].0, x[2].1, sel);
    let muxb = mux(&mut b, "muxb", x[3].0, x[3].1, sel);
    let muxc = mux(&mut b, "muxc", x[2].1, x[2].0, sel);
    let muxd = mux(&mut b, "muxd", x[3].1, x[3].0, sel);
    let shared = [muxa, muxb, muxc, muxd];

    // Gadget b-side operands: registered directly under DOM, refreshed
    // with one fresh mask and then registered under HPC1.
    fn prep_b(
        b: &mut CircuitBuilder,
        st: &mut St,
        pfx: &str,
        n0: NetId,
        n1: NetId,
        r: Option<NetId>,
    ) -> (NetId, NetId) {
        match r {
            Some(r) => refresh2(b, st, pfx, n0, n1, r),
            None => {
                let r0 = reg(b, st, &format!("{pfx}r0"), n0);
                let r1 = reg(b, st, &format!("{pfx}r1"), n1);
                (r0, r1)
            }
        }
    }

    let mut s0 = St::new("S0");
    for m in shared {
        s0.bind.insert(m, false);
    }
    let l1_0 = gate(&mut b, &mut s0, "l1_0", GateKind::Not, &[x[3].0]);
    let l2_0 = gate(&mut b, &mut s0, "l2_0", GateKind::Xor, &[x[1].0, x[2].0]);
    let l2_1 = gate(&mut b, &mut s0, "l2_1", GateKind::Xor, &[x[1].1, x[2].1]);
    let u0 = gate(&mut b, &mut s0, "u0", GateKind::Xor, &[muxa, muxb]);
    let v0 = gate(&mut b, &mut s0, "v0", GateKind::Xor, &[muxc, muxd]);
    let rl1_0 = reg(&mut b, &mut s0, "rl1_0", l1_0);
    let rl1_1 = reg(&mut b, &mut s0, "rl1_1", x[3].1);
    let rl3_0 = reg(&mut b, &mut s0, "rl3_0", u0);
    let rl3_1 = reg(&mut b, &mut s0, "rl3_1", v0);
    let (t1b0, t1b1) = prep_b(&mut b, &mut s0, "t1b", l2_0, l2_1, refreshers.map(|r| r[0]));
    let (t2b0, t2b1) = prep_b(&mut b, &mut s0, "t2b", l2_0, l2_1, refreshers.map(|r| r[1]));
    let (t1c0, t1c1) = dom_core(&mut b, &mut s0, "t1", rl1_0, rl1_1, t1b0, t1b1, z1);
    let rt1_0 = reg(&mut b, &mut s0, "rt1_0", t1c0);
    let rt1_1 = reg(&mut b, &mut s0, "rt1_1", t1c1);
    let (t2c0, t2c1) = dom_core(&mut b, &mut s0, "t2", rl3_0, rl3_1, t2b0, t2b1, z2);
    let rt2_0 = reg(&mut b, &mut s0, "rt2_0", t2c0);
    let rt2_1 = reg(&mut b, &mut s0, "rt2_1", t2c1);

    let mut s1 = St::new("S1");
    for m in shared {
        s1.bind.insert(m, true);
    }
    let u1 = gate(&mut b, &mut s1, "u1", GateKind::Xor, &[muxa, muxb]);
    let v1 = gate(&mut b, &mut s1, "v1", GateKind::Xor, &[muxc, muxd]);
    let l5_0 = gate(&mut b, &mut s1, "l5_0", GateKind::Xor, &[v1, rt1_0]);
    let l5_1 = gate(&mut b, &mut s1, "l5_1", GateKind::Xor, &[u1, rt1_1]);
    let e6_0 = gate(&mut b, &mut s1, "e6_0", GateKind::Xor, &[x[0].0, x[2].0]);
    let l6_0 = gate(&mut b, &mut s1, "l6_0", GateKind::Xor, &[e6_0, rt2_0]);
    let e6_1 = gate(&mut b, &mut s1, "e6_1", GateKind::Xor, &[x[0].1, x[2].1]);
    let l6_1 = gate(&mut b, &mut s1, "l6_1", GateKind::Xor, &[e6_1, rt2_1]);
    let l7_0 = gate(&mut b, &mut s1, "l7_0", GateKind::Xnor, &[x[2].0, rt2_0]);
    let l7_1 = gate(&mut b, &mut s1, "l7_1", GateKind::Xor, &[x[2].1, rt2_1]);
    let rl5_0 = reg(&mut b, &mut s1, "rl5_0", l5_0);
    let rl5_1 = reg(&mut b, &mut s1, "rl5_1", l5_1);
    let rl7_0 = reg(&mut b, &mut s1, "rl7_0", l7_0);
    let rl7_1 = reg(&mut b, &mut s1, "rl7_1", l7_1);
    let (t3b0, t3b1) = prep_b(&mut b, &mut s1, "t3b", l6_0, l6_1, refreshers.map(|r| r[2]));
    let (t4b0, t4b1) = prep_b(&mut b, &mut s1, "t4b", l6_0, l6_1, refreshers.map(|r| r[3]));
    let (t3c0, t3c1) = dom_core(&mut b, &mut s1, "t3", rl5_0, rl5_1, t3b0, t3b1, z3);
    let rt3_0 = reg(&mut b, &mut s1, "rt3_0", t3c0);
    let rt3_1 = reg(&mut b, &mut s1, "rt3_1", t3c1);
    let (t4c0, t4c1) = dom_core(&mut b, &mut s1, "t4", rl7_0, rl7_1, t4b0, t4b1, z4);
    let rt4_0 = reg(&mut b, &mut s1, "rt4_0", t4c0);
    let rt4_1 = reg(&mut b, &mut s1, "rt4_1", t4c1);

    // Output XOR trees; share 0 of y2 and y3 absorbs the constant via
    // one XNOR. The last chain link carries the output's own name.
    fn tree(
        b: &mut CircuitBuilder,
        st: &mut St,
        name: &str,
        kind: GateKind,
        first: (NetId, NetId),
        rest: &[NetId],
    ) -> NetId {
        let mut acc = gate(b, st, &format!("{name}a"), kind, &[first.0, first.1]);
        for (i, &n) in rest.iter().enumerate() {
            let nm = if i + 1 == rest.len() {
                String::from(name)
            } else {
                format!("{name}{}", (b'b' + i as u8) as char)
            };
            acc = gate(b, st, &nm, GateKind::Xor, &[acc, n]);
        }
        acc
    }
    let y0_0 = tree(&mut b, &mut s1, "y0_0", GateKind::Xor, (x[0].0, x[1].0), &[v1, rt1_0, rt2_0]);
    let y0_1 = tree(&mut b, &mut s1, "y0_1", GateKind::Xor, (x[0].1, x[1].1), &[u1, rt1_1, rt2_1]);
    let y1_0 = tree(&mut b, &mut s1, "y1_0", GateKind::Xor, (x[0].0, v1), &[rt1_0, rt4_0]);
    let y1_1 = tree(&mut b, &mut s1, "y1_1", GateKind::Xor, (x[0].1, u1), &[rt1_1, rt4_1]);
    let y2_0 = tree(&mut b, &mut s1, "y2_0", GateKind::Xnor, (x[1].0, v1), &[rt1_0, rt2_0, rt3_0]);
    let y2_1 = tree(&mut b, &mut s1, "y2_1", GateKind::Xor, (x[1].1, u1), &[rt1_1, rt2_1, rt3_1]);
    let y3_0 = tree(&mut b, &mut s1, "y3_0", GateKind::Xnor, (x[3].0, rt1_0), &[rt2_0, rt4_0]);
    let y3_1 = tree(&mut b, &mut s1, "y3_1", GateKind::Xor, (x[3].1, rt1_1), &[rt2_1, rt4_1]);

    let outs = [y0_0, y0_1, y1_0, y1_1, y2_0, y2_1, y3_0, y3_1];
    let c = finish(b, alloc::vec![s0, s1], &outs);
    let mut l = Labeling::new();
    for (i, &(s0n, s1n)) in x.iter().enumerate() {
        share2(&mut l, &format!("x{i}"), s0n, s1n);
    }
    for m in [z1, z2, z3, z4] {
        l.assign(m, Role::Mask);
    }
    if let Some(rs) = refreshers {
        for m in rs {
            l.assign(m, Role::Mask);
        }
    }
    l.assign(sel, Role::Public);
    (c, l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsm::{scheduled_support, split_all};
    use crate::label::{verify, verify_any, Model, DEFAULT_SET_CAP};
    use crate::oracle::{
        oracle_stable, oracle_transient, scheduled_tables, simulate_all, TruthTables,
    };

    fn tables(c: &Circuit) -> TruthTables {
        if c.fsm().is_some() {
            scheduled_tables(c).expect("fixture small enough to enumerate")
        } else {
            simulate_all(c).expect("fixture small enough to enumerate")
        }
    }

    // XOR of two share columns: the unmasked value per assignment.
    fn recombine(tt: &TruthTables, c: &Circuit, a: &str, b: &str) -> Vec<u64> {
        let ta = tt.table(c.net(a).unwrap());
        let tb = tt.table(c.net(b).unwrap());
        ta.iter().zip(tb).map(|(x, y)| x ^ y).collect()
    }

    fn verdicts(c: &Circuit, l: &Labeling) -> (bool, bool) {
        let s = verify(c, l, Model::Stable, 1, DEFAULT_SET_CAP).unwrap();
        let t = verify(c, l, Model::Transient, 1, DEFAULT_SET_CAP).unwrap();
        (s.secure(), t.secure())
    }

    // Monolithic runs of the shared-unit fixtures leak right behind the
    // lowered operand muxes but grow huge sets further down, so insecurity
    // is established with the early-exit sweep.
    fn any_verdicts(c: &Circuit, l: &Labeling) -> (bool, bool) {
        let s = verify_any(c, l, Model::Stable, 1, DEFAULT_SET_CAP).unwrap();
        let t = verify_any(c, l, Model::Transient, 1, DEFAULT_SET_CAP).unwrap();
        (s.secure(), t.secure())
    }

    fn statewise_verdicts(c: &Circuit, l: &Labeling) -> Vec<(bool, bool)> {
        split_all(c, l)
            .unwrap()
            .iter()
            .map(|sd| verdicts(&sd.circuit, &sd.labeling))
            .collect()
    }

    #[test]
    fn catalog_names_resolve() {
        for spec in list() {
            let (c, l) = generate(spec.name, false, None).unwrap();
            l.check(&c).unwrap();
            let states = c.fsm().map_or(0, |f| f.states.len());
            assert_eq!(states, spec.states, "{}", spec.name);
            if let Some(alt) = spec.alt_states {
                let (c4, l4) = generate(spec.name, false, Some(alt)).unwrap();
                l4.check(&c4).unwrap();
                assert_eq!(c4.fsm().unwrap().states.len(), alt);
            }
            if c.fsm().is_some() {
                let used = scheduled_support(&c).unwrap();
                let owned: alloc::collections::BTreeSet<_> = split_all(&c, &l)
                    .unwrap()
                    .iter()
                    .flat_map(|sd| sd.origin.iter().copied())
                    .collect();
                let scheduled: alloc::collections::BTreeSet<_> = owned
                    .iter()
                    .copied()
                    .filter(|&id| {
                        !matches!(
                            c.node(id).kind,
                            GateKind::Input | GateKind::Const0 | GateKind::Const1
                        )
                    })
                    .collect();
                assert_eq!(used, scheduled, "{}: dead scheduled ops", spec.name);
            }
        }
        assert!(matches!(generate("nope", false, None), Err(GenError::UnknownBench(_))));
        assert!(matches!(
            generate("dom-v1", true, None),
            Err(GenError::FlawNotApplicable(_))
        ));
        assert!(matches!(
            generate("cascade-hpc2", false, Some(5)),
            Err(GenError::BadStates { .. })
        ));
    }

    #[test]
    fn generation_is_deterministic() {
        for spec in list() {
            let (c1, _) = generate(spec.name, false, None).unwrap();
            let (c2, _) = generate(spec.name, false, None).unwrap();
            assert_eq!(c1.len(), c2.len());
            for (id, n) in c1.nodes() {
                assert_eq!(c1.name(id), c2.name(id));
                assert_eq!(n, c2.node(id));
            }
        }
    }

    #[test]
    fn dom_v1_v2_verdicts_and_function() {
        let (c, l) = generate("dom-v1", false, None).unwrap();
        let tt = tables(&c);
        let a = recombine(&tt, &c, "a0", "a1");
        let b = recombine(&tt, &c, "b0", "b1");
        let y = recombine(&tt, &c, "y0", "y1");
        for i in 0..y.len() {
            assert_eq!(y[i], a[i] & b[i]);
        }
        assert_eq!(verdicts(&c, &l), (true, false));
        assert!(oracle_stable(&c, &l).unwrap().secure());
        assert!(!oracle_transient(&c, &l).unwrap().secure());

        let (c2, l2) = generate("dom-v2", false, None).unwrap();
        assert_eq!(verdicts(&c2, &l2), (true, true));
        assert!(oracle_transient(&c2, &l2).unwrap().secure());
    }

    #[test]
    fn dom_v3_v4_schedule_function_and_verdicts() {
        for (name, statewise_ok) in [("dom-v3", false), ("dom-v4", true)] {
            let (c, l) = generate(name, false, None).unwrap();
            let tt = tables(&c);
            let a = recombine(&tt, &c, "a0", "a1");
            let b = recombine(&tt, &c, "b0", "b1");
            let y = recombine(&tt, &c, "y0", "y1");
            for i in 0..y.len() {
                assert_eq!(y[i], a[i] & b[i], "{name}");
            }
            let lowered = c.lower_mux();
            assert_eq!(any_verdicts(&lowered, &l), (false, false), "{name} monolithic");
            let per_state = statewise_verdicts(&c, &l);
            assert_eq!(
                per_state.iter().all(|&v| v == (true, true)),
                statewise_ok,
                "{name}"
            );
        }
    }

    fn check_cascade_function(c: &Circuit) {
        let tt = tables(c);
        let a = recombine(&tt, c, "a0", "a1");
        let b = recombine(&tt, c, "b0", "b1");
        let d = recombine(&tt, c, "d0", "d1");
        let y = recombine(&tt, c, "y0", "y1");
        for i in 0..y.len() {
            assert_eq!(y[i], a[i] & b[i] & d[i]);
        }
    }

    #[test]
    fn cascades_compute_abd() {
        for name in ["cascade-dom", "cascade-hpc1", "cascade-hpc2", "cascade-comar"] {
            let (c, _) = generate(name, false, None).unwrap();
            check_cascade_function(&c);
        }
        let (c, _) = generate("cascade-hpc1", false, Some(4)).unwrap();
        check_cascade_function(&c);
        let (c, _) = generate("cascade-dom", true, None).unwrap();
        check_cascade_function(&c);
    }

    #[test]
    fn cascades_statewise_secure_monolithic_insecure() {
        for name in ["cascade-dom", "cascade-hpc1", "cascade-hpc2", "cascade-comar"] {
            let (c, l) = generate(name, false, None).unwrap();
            for (i, v) in statewise_verdicts(&c, &l).iter().enumerate() {
                assert_eq!(*v, (true, true), "{name} state {i}");
            }
            let lowered = c.lower_mux();
            assert_eq!(any_verdicts(&lowered, &l), (false, false), "{name} monolithic");
        }
    }

    #[test]
    fn flawed_cascade_localizes_to_second_gadget() {
        let (c, l) = generate("cascade-dom", true, None).unwrap();
        let subs = split_all(&c, &l).unwrap();
        assert_eq!(subs.len(), 2);
        assert_eq!(verdicts(&subs[0].circuit, &subs[0].labeling), (true, true));
        let s = verify(&subs[1].circuit, &subs[1].labeling, Model::Stable, 1, DEFAULT_SET_CAP)
            .unwrap();
        let t =
            verify(&subs[1].circuit, &subs[1].labeling, Model::Transient, 1, DEFAULT_SET_CAP)
                .unwrap();
        assert!(!s.secure() && !t.secure());
        // The bare-secret monomial must be visible at an output share.
        assert!(t.leaks.iter().any(|lk| {
            subs[1].circuit.name(lk.net) == "y0"
                && lk.monomial.vars().all(|v| v.is_secret())
        }));
        // Exact oracle agrees on both models for the flawed state.
        assert!(!oracle_stable(&subs[1].circuit, &subs[1].labeling).unwrap().secure());
        assert!(!oracle_transient(&subs[1].circuit, &subs[1].labeling).unwrap().secure());
        // Unflawed substrate is clean everywhere.
        let (c2, l2) = cascade_dom_2state();
        for sd in split_all(&c2, &l2).unwrap() {
            assert_eq!(verdicts(&sd.circuit, &sd.labeling), (true, true));
            assert!(oracle_transient(&sd.circuit, &sd.labeling).unwrap().secure());
        }
    }

    #[test]
    fn inject_requires_refresh_shape() {
        let (c, _) = dom_v1();
        let i1 = c.net("i1").unwrap();
        let y0 = c.net("y0").unwrap();
        let flawed = inject_reassociation(&c, i1, y0).unwrap();
        // Rewired: i1 = p1 ^ p2, y0 = i1 ^ z. Same function, mask last.
        assert_eq!(flawed.node(i1).ops, [c.net("p1").unwrap(), c.net("p2").unwrap()]);
        assert_eq!(flawed.node(y0).ops, [i1, c.net("z").unwrap()]);
        let tt = tables(&flawed);
        let tt0 = tables(&c);
        assert_eq!(tt.table(y0), tt0.table(y0));
        assert_eq!(tt.table(c.net("y1").unwrap()), tt0.table(c.net("y1").unwrap()));
        // A net without the refresh shape is rejected.
        let p1 = c.net("p1").unwrap();
        assert!(matches!(
            inject_reassociation(&c, p1, y0),
            Err(GenError::TargetShape(_))
        ));
    }

    #[test]
    fn present_anf_matches_sbox_table() {
        for xi in 0u16..16 {
            let bit = |i: u16| (xi >> i) & 1;
            let (x0, x1, x2, x3) = (bit(0), bit(1), bit(2), bit(3));
            let l1 = 1 ^ x3;
            let l2 = x1 ^ x2;
            let l3 = x2 ^ x3;
            let t1 = l1 & l2;
            let t2 = l3 & l2;
            let l5 = l3 ^ t1;
            let l6 = x0 ^ x2 ^ t2;
            let l7 = 1 ^ x2 ^ t2;
            let t3 = l5 & l6;
            let t4 = l7 & l6;
            let y0 = x0 ^ x1 ^ x2 ^ x3 ^ t1 ^ t2;
            let y1 = x0 ^ x2 ^ x3 ^ t1 ^ t4;
            let y2 = 1 ^ x1 ^ x2 ^ x3 ^ t1 ^ t2 ^ t3;
            let y3 = 1 ^ x3 ^ t1 ^ t2 ^ t4;
            let got = y0 | (y1 << 1) | (y2 << 2) | (y3 << 3);
            assert_eq!(got as u8, PRESENT_SBOX[xi as usize], "x = {xi}");
        }
    }

    #[test]
    fn present_circuits_compute_sbox() {
        for name in ["present-dom", "present-hpc1"] {
            let (c, _) = generate(name, false, None).unwrap();
            let tt = tables(&c);
            let xs: Vec<_> = (0..4)
                .map(|i| recombine(&tt, &c, &format!("x{i}_0"), &format!("x{i}_1")))
                .collect();
            let ys: Vec<_> = (0..4)
                .map(|i| recombine(&tt, &c, &format!("y{i}_0"), &format!("y{i}_1")))
                .collect();
            for w in 0..xs[0].len() {
                for bit in 0..64 {
                    let nib = (0..4).fold(0usize, |acc, i| {
                        acc | ((((xs[i][w] >> bit) & 1) as usize) << i)
                    });
                    let got = (0..4).fold(0u8, |acc, i| {
                        acc | ((((ys[i][w] >> bit) & 1) as u8) << i)
                    });
                    assert_eq!(got, PRESENT_SBOX[nib], "{name}");
                }
            }
        }
    }

    #[test]
    fn present_statewise_secure_monolithic_insecure() {
        for name in ["present-dom", "present-hpc1"] {
            let (c, l) = generate(name, false, None).unwrap();
            for (i, v) in statewise_verdicts(&c, &l).iter().enumerate() {
                assert_eq!(*v, (true, true), "{name} state {i}");
            }
            let lowered = c.lower_mux();
            assert_eq!(any_verdicts(&lowered, &l), (false, false), "{name} monolithic");
        }
    }

    #[test]
    fn hpc1_four_state_variant_matches_default_semantics() {
        let (c, l) = generate("cascade-hpc1", false, Some(4)).unwrap();
        for (i, v) in statewise_verdicts(&c, &l).iter().enumerate() {
            assert_eq!(*v, (true, true), "state {i}");
        }
        let lowered = c.lower_mux();
        assert_eq!(any_verdicts(&lowered, &l), (false, false));
    }

    #[test]
    fn worked_example_verdicts() {
        let (c, l) = generate("worked-example", false, None).unwrap();
        assert_eq!(verdicts(&c, &l), (true, false));
        let t = verify(&c, &l, Model::Transient, 1, DEFAULT_SET_CAP).unwrap();
        assert_eq!(t.leaks.len(), 1);
        assert_eq!(c.name(t.leaks[0].net), "G3");
    }
}
