//! Exhaustive-simulation oracle: exact ground truth on small circuits.
//!
//! Enumerates every input assignment once into bit-packed truth tables,
//! then decides per-net security by comparing value distributions over the
//! masks between secret assignments, and recovers exact Fourier supports
//! for cross-checking the propagated labels.

use crate::circuit::{Circuit, Error as CircuitError, GateKind, NetId};
use crate::label::{self, CorrelationSet, Labeling, Monomial};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Hard cap on exhaustively enumerable inputs.
pub const MAX_ORACLE_INPUTS: usize = 24;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Error {
    TooManyInputs { count: usize },
    ConeTooWide { net: u32, size: usize },
    Circuit(CircuitError),
    Label(label::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TooManyInputs { count } => write!(
                f,
                "{count} inputs exceed the exhaustive-simulation cap of {MAX_ORACLE_INPUTS}"
            ),
            Error::ConeTooWide { net, size } => {
                write!(f, "probe cone of net #{net} spans {size} nets (limit 64)")
            }
            Error::Circuit(e) => e.fmt(f),
            Error::Label(e) => e.fmt(f),
        }
    }
}

impl From<CircuitError> for Error {
    fn from(e: CircuitError) -> Self {
        Error::Circuit(e)
    }
}

impl From<label::Error> for Error {
    fn from(e: label::Error) -> Self {
        Error::Label(e)
    }
}

/// Bit-packed value of every net under every input assignment. Assignment
/// index bit p is the value of input p in `Circuit::inputs` order.
pub struct TruthTables {
    k: usize,
    tables: Vec<Vec<u64>>,
}

impl TruthTables {
    pub fn input_count(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> usize {
        1usize << self.k
    }

    pub fn table(&self, net: NetId) -> &[u64] {
        &self.tables[net.index()]
    }

    pub fn bit(&self, net: NetId, idx: usize) -> bool {
        self.tables[net.index()][idx >> 6] >> (idx & 63) & 1 == 1
    }
}

fn input_pattern(p: usize, words: usize) -> Vec<u64> {
    const P: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    if p < 6 {
        vec![P[p]; words]
    } else {
        (0..words)
            .map(|w| if w >> (p - 6) & 1 == 1 { !0 } else { 0 })
            .collect()
    }
}

/// Evaluates every net over all 2^k input assignments, registers treated
/// as transparent (feed-forward semantics).
pub fn simulate_all(c: &Circuit) -> Result<TruthTables, Error> {
    let k = c.inputs().len();
    if k > MAX_ORACLE_INPUTS {
        return Err(Error::TooManyInputs { count: k });
    }
    let n = 1usize << k;
    let words = n.div_ceil(64);
    let pad = if n >= 64 { !0u64 } else { (1u64 << n) - 1 };
    let pos: BTreeMap<NetId, usize> = c
        .inputs()
        .iter()
        .enumerate()
        .map(|(p, &id)| (id, p))
        .collect();
    let mut tables: Vec<Vec<u64>> = vec![Vec::new(); c.len()];
    for id in c.topo_order()? {
        let node = c.node(id);
        let bin = |f: fn(u64, u64) -> u64, tables: &[Vec<u64>]| -> Vec<u64> {
            let a = &tables[node.ops[0].index()];
            let b = &tables[node.ops[1].index()];
            (0..words).map(|w| f(a[w], b[w])).collect()
        };
        let mut t = match node.kind {
            GateKind::Input => input_pattern(pos[&id], words),
            GateKind::Const0 => vec![0; words],
            GateKind::Const1 => vec![!0; words],
            GateKind::Buf | GateKind::Reg => tables[node.ops[0].index()].clone(),
            GateKind::Not => tables[node.ops[0].index()].iter().map(|w| !w).collect(),
            GateKind::And => bin(|a, b| a & b, &tables),
            GateKind::Nand => bin(|a, b| !(a & b), &tables),
            GateKind::Or => bin(|a, b| a | b, &tables),
            GateKind::Nor => bin(|a, b| !(a | b), &tables),
            GateKind::Xor => bin(|a, b| a ^ b, &tables),
            GateKind::Xnor => bin(|a, b| !(a ^ b), &tables),
            GateKind::Mux => {
                let a = &tables[node.ops[0].index()];
                let b = &tables[node.ops[1].index()];
                let s = &tables[node.ops[2].index()];
                (0..words).map(|w| (b[w] & s[w]) | (a[w] & !s[w])).collect()
            }
        };
        *t.last_mut().unwrap() &= pad;
        tables[id.index()] = t;
    }
    Ok(TruthTables { k, tables })
}

/// Evaluates a scheduled design over all 2^k input assignments, state by
/// state: each state's ops compute under that state's MUX routing,
/// registers latch in their writing state and hold after. A net's table is
/// its value in the state that owns it; unscheduled routing nets (the
/// muxes) keep empty tables.
pub fn scheduled_tables(c: &Circuit) -> Result<TruthTables, Error> {
    let fsm = c.fsm().ok_or(Error::Circuit(CircuitError::NoFsm))?;
    let k = c.inputs().len();
    if k > MAX_ORACLE_INPUTS {
        return Err(Error::TooManyInputs { count: k });
    }
    let n = 1usize << k;
    let words = n.div_ceil(64);
    let pad = if n >= 64 { !0u64 } else { (1u64 << n) - 1 };
    let order = c.topo_order()?;
    let mut tables: Vec<Vec<u64>> = vec![Vec::new(); c.len()];
    for (p, &id) in c.inputs().iter().enumerate() {
        let mut t = input_pattern(p, words);
        *t.last_mut().unwrap() &= pad;
        tables[id.index()] = t;
    }
    for (id, node) in c.nodes() {
        match node.kind {
            GateKind::Const0 => tables[id.index()] = vec![0; words],
            GateKind::Const1 => tables[id.index()] = vec![pad; words],
            _ => {}
        }
    }
    for (s, st) in fsm.states.iter().enumerate() {
        let mine: BTreeSet<NetId> = st.active.iter().chain(&st.reg_writes).copied().collect();
        for &id in order.iter().filter(|id| mine.contains(id)) {
            let node = c.node(id);
            let mut ops: Vec<Vec<u64>> = Vec::with_capacity(node.ops.len());
            for &raw in &node.ops {
                let op = c.resolve_operand(raw, s)?;
                debug_assert!(
                    !tables[op.index()].is_empty(),
                    "operand admitted by schedule validation"
                );
                ops.push(tables[op.index()].clone());
            }
            let mut t: Vec<u64> = match node.kind {
                GateKind::Buf | GateKind::Reg => ops[0].clone(),
                GateKind::Not => ops[0].iter().map(|w| !w).collect(),
                GateKind::And => (0..words).map(|w| ops[0][w] & ops[1][w]).collect(),
                GateKind::Nand => (0..words).map(|w| !(ops[0][w] & ops[1][w])).collect(),
                GateKind::Or => (0..words).map(|w| ops[0][w] | ops[1][w]).collect(),
                GateKind::Nor => (0..words).map(|w| !(ops[0][w] | ops[1][w])).collect(),
                GateKind::Xor => (0..words).map(|w| ops[0][w] ^ ops[1][w]).collect(),
                GateKind::Xnor => (0..words).map(|w| !(ops[0][w] ^ ops[1][w])).collect(),
                GateKind::Input | GateKind::Const0 | GateKind::Const1 | GateKind::Mux => {
                    unreachable!("schedulable op kinds only")
                }
            };
            *t.last_mut().unwrap() &= pad;
            tables[id.index()] = t;
        }
    }
    Ok(TruthTables { k, tables })
}

/// Exact Fourier support of a net: integer Walsh-Hadamard transform of the
/// plus/minus-one table (0 maps to +1, 1 to -1), each nonzero coefficient's
/// input subset translated to a base monomial by multiplying the inputs'
/// monomials. `input_monos` is indexed by input position.
pub fn fourier_support(
    tt: &TruthTables,
    net: NetId,
    input_monos: &[Monomial],
) -> CorrelationSet {
    let n = tt.assignments();
    let mut f: Vec<i64> = (0..n).map(|i| if tt.bit(net, i) { -1 } else { 1 }).collect();
    let mut len = 1;
    while len < n {
        let mut i = 0;
        while i < n {
            for j in i..i + len {
                let (a, b) = (f[j], f[j + len]);
                f[j] = a + b;
                f[j + len] = a - b;
            }
            i += len * 2;
        }
        len *= 2;
    }
    let mut out = CorrelationSet::new();
    for (subset, &coef) in f.iter().enumerate() {
        if coef == 0 {
            continue;
        }
        let mut m = Monomial::empty();
        for (p, mono) in input_monos.iter().enumerate() {
            if subset >> p & 1 == 1 {
                m = m.mul(mono);
            }
        }
        out.insert(m);
    }
    out
}

/// Everything a glitch probe on `net` may reveal: the net itself plus its
/// combinational fan-in up to and including register outputs and primary
/// inputs. Probing a register reveals only its settled output; constants
/// reveal nothing further.
pub fn probe_cone(c: &Circuit, net: NetId) -> BTreeSet<NetId> {
    let mut cone = BTreeSet::from([net]);
    if matches!(
        c.node(net).kind,
        GateKind::Input | GateKind::Reg | GateKind::Const0 | GateKind::Const1
    ) {
        return cone;
    }
    let mut work = vec![net];
    while let Some(id) = work.pop() {
        for &op in &c.node(id).ops {
            match c.node(op).kind {
                GateKind::Const0 | GateKind::Const1 => {}
                GateKind::Input | GateKind::Reg => {
                    cone.insert(op);
                }
                _ => {
                    if cone.insert(op) {
                        work.push(op);
                    }
                }
            }
        }
    }
    cone
}

/// Base-variable enumeration glue: maps each assignment over the base
/// variables to the induced input-assignment index and to its
/// (public, secret) group.
struct Encoding {
    kb: usize,
    index_of: Vec<u32>,
    gid: Vec<u32>,
    n_sec: usize,
    n_groups: usize,
}

fn encode(c: &Circuit, l: &Labeling) -> Result<Encoding, Error> {
    let monos = l.input_monomials(c)?;
    let base_vars = l.base_vars(c)?;
    let kb = base_vars.len();
    if kb > MAX_ORACLE_INPUTS {
        return Err(Error::TooManyInputs { count: kb });
    }
    let var_pos: BTreeMap<_, _> = base_vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mono_mask: Vec<u32> = c
        .inputs()
        .iter()
        .map(|id| {
            monos[id]
                .vars()
                .fold(0u32, |acc, v| acc | 1 << var_pos[v])
        })
        .collect();
    let sec_pos: Vec<usize> = base_vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_secret())
        .map(|(i, _)| i)
        .collect();
    let pub_pos: Vec<usize> = base_vars
        .iter()
        .enumerate()
        .filter(|(_, v)| matches!(v, label::BaseVar::Public(_)))
        .map(|(i, _)| i)
        .collect();
    let compress = |a: usize, positions: &[usize]| -> u32 {
        positions
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &p)| acc | ((a >> p & 1) as u32) << i)
    };
    let n_sec = 1usize << sec_pos.len();
    let n_pub = 1usize << pub_pos.len();
    let total = 1usize << kb;
    let mut index_of = Vec::with_capacity(total);
    let mut gid = Vec::with_capacity(total);
    for a in 0..total {
        let idx = mono_mask
            .iter()
            .enumerate()
            .fold(0u32, |acc, (p, &mask)| {
                acc | (((a as u32 & mask).count_ones() & 1) << p)
            });
        index_of.push(idx);
        gid.push(compress(a, &pub_pos) * n_sec as u32 + compress(a, &sec_pos));
    }
    Ok(Encoding {
        kb,
        index_of,
        gid,
        n_sec,
        n_groups: n_sec * n_pub,
    })
}

/// Nets the oracle found secret-dependent, in net order.
#[derive(Clone, Debug, Default)]
pub struct OracleReport {
    pub insecure: Vec<NetId>,
}

impl OracleReport {
    pub fn secure(&self) -> bool {
        self.insecure.is_empty()
    }
}

/// Exact settled-value check: a net fails iff for some fixed public
/// assignment, its value distribution over the masks differs between two
/// secret assignments.
pub fn oracle_stable(c: &Circuit, l: &Labeling) -> Result<OracleReport, Error> {
    let tt = simulate_all(c)?;
    let enc = encode(c, l)?;
    let total = 1usize << enc.kb;
    let mut report = OracleReport::default();
    for (id, _) in c.nodes() {
        let mut ones = vec![0u32; enc.n_groups];
        for a in 0..total {
            if tt.bit(id, enc.index_of[a] as usize) {
                ones[enc.gid[a] as usize] += 1;
            }
        }
        if !groups_agree(&ones, enc.n_sec) {
            report.insecure.push(id);
        }
    }
    Ok(report)
}

fn groups_agree<T: PartialEq>(per_group: &[T], n_sec: usize) -> bool {
    per_group
        .chunks(n_sec)
        .all(|block| block.iter().all(|x| *x == block[0]))
}

/// Exact glitch-extended check: a net fails iff the joint distribution of
/// its probe cone over the masks differs between two secret assignments
/// for some fixed public assignment.
pub fn oracle_transient(c: &Circuit, l: &Labeling) -> Result<OracleReport, Error> {
    let tt = simulate_all(c)?;
    let enc = encode(c, l)?;
    let total = 1usize << enc.kb;
    let group_size = total / enc.n_groups;
    let mut report = OracleReport::default();
    for (id, _) in c.nodes() {
        let cone: Vec<NetId> = probe_cone(c, id).into_iter().collect();
        if cone.len() > 64 {
            return Err(Error::ConeTooWide {
                net: id.raw(),
                size: cone.len(),
            });
        }
        let mut keyed: Vec<(u32, u64)> = Vec::with_capacity(total);
        for a in 0..total {
            let idx = enc.index_of[a] as usize;
            let key = cone
                .iter()
                .enumerate()
                .fold(0u64, |acc, (j, &w)| acc | (tt.bit(w, idx) as u64) << j);
            keyed.push((enc.gid[a], key));
        }
        keyed.sort_unstable();
        // Every (public, secret) group holds exactly 2^masks assignments,
        // so sorted equal-size blocks compare multisets directly.
        let blocks: Vec<&[(u32, u64)]> = keyed.chunks(group_size).collect();
        let same = blocks.chunks(enc.n_sec).all(|pubblock| {
            pubblock.iter().all(|b| {
                b.iter()
                    .zip(pubblock[0])
                    .all(|((_, x), (_, y))| x == y)
            })
        });
        if !same {
            report.insecure.push(id);
        }
    }
    Ok(report)
}

/// Input monomials in `Circuit::inputs` order, as `fourier_support` needs.
pub fn ordered_input_monomials(c: &Circuit, l: &Labeling) -> Result<Vec<Monomial>, Error> {
    let monos = l.input_monomials(c)?;
    Ok(c.inputs().iter().map(|id| monos[id].clone()).collect())
}
