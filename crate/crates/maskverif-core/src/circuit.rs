//! Gate-level netlist IR: nodes, FSM schedules, validation, MUX lowering,
//! topological ordering and functional evaluation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Identifies a net and the node driving it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NetId(u32);

impl NetId {
    pub fn from_raw(raw: u32) -> Self {
        NetId(raw)
    }

    pub fn raw(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum GateKind {
    Input,
    Const0,
    Const1,
    Buf,
    Not,
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    Mux,
    Reg,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Input | GateKind::Const0 | GateKind::Const1 => 0,
            GateKind::Buf | GateKind::Not | GateKind::Reg => 1,
            GateKind::Mux => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Input => "INPUT",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
            GateKind::Buf => "BUF",
            GateKind::Not => "NOT",
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Mux => "MUX",
            GateKind::Reg => "REG",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "INPUT" => GateKind::Input,
            "CONST0" => GateKind::Const0,
            "CONST1" => GateKind::Const1,
            "BUF" => GateKind::Buf,
            "NOT" => GateKind::Not,
            "AND" => GateKind::And,
            "NAND" => GateKind::Nand,
            "OR" => GateKind::Or,
            "NOR" => GateKind::Nor,
            "XOR" => GateKind::Xor,
            "XNOR" => GateKind::Xnor,
            "MUX" => GateKind::Mux,
            "REG" => GateKind::Reg,
            _ => return None,
        })
    }

    /// Boolean function of the gate on resolved operand values.
    /// MUX takes (in0, in1, sel); REG and BUF pass through.
    pub fn eval(self, ops: &[bool]) -> bool {
        match self {
            GateKind::Input => unreachable!("inputs have no gate function"),
            GateKind::Const0 => false,
            GateKind::Const1 => true,
            GateKind::Buf | GateKind::Reg => ops[0],
            GateKind::Not => !ops[0],
            GateKind::And => ops[0] & ops[1],
            GateKind::Nand => !(ops[0] & ops[1]),
            GateKind::Or => ops[0] | ops[1],
            GateKind::Nor => !(ops[0] | ops[1]),
            GateKind::Xor => ops[0] ^ ops[1],
            GateKind::Xnor => !(ops[0] ^ ops[1]),
            GateKind::Mux => {
                if ops[2] {
                    ops[1]
                } else {
                    ops[0]
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub kind: GateKind,
    pub ops: Vec<NetId>,
}

/// One FSM state: the datapath operations executing in it, the registers it
/// writes, and the routing of every operand multiplexer it resolves.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FsmState {
    pub name: String,
    pub active: Vec<NetId>,
    pub reg_writes: Vec<NetId>,
    pub mux_bindings: BTreeMap<NetId, bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FsmSchedule {
    pub states: Vec<FsmState>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    nodes: Vec<Node>,
    names: Vec<String>,
    by_name: BTreeMap<String, NetId>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    fsm: Option<FsmSchedule>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Error {
    DuplicateName(String),
    UnknownName(String),
    Arity { net: u32, expected: usize, got: usize },
    BadOperand { net: u32, operand: u32 },
    Cycle { net: u32 },
    NotAnInput { net: u32 },
    BadOutput { net: u32 },
    FsmBadRole { net: u32, state: usize },
    Unscheduled { net: u32 },
    MultiplyScheduled { net: u32 },
    MissingBinding { mux: u32, state: usize },
    OrderViolation { net: u32, operand: u32, state: usize },
    RegReadBeforeWrite { reg: u32, state: usize },
    MissingInput { net: u32 },
    NoFsm,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DuplicateName(n) => write!(f, "duplicate net name `{n}`"),
            Error::UnknownName(n) => write!(f, "unknown net name `{n}`"),
            Error::Arity { net, expected, got } => {
                write!(f, "net #{net}: expected {expected} operands, got {got}")
            }
            Error::BadOperand { net, operand } => {
                write!(f, "net #{net}: operand #{operand} does not exist")
            }
            Error::Cycle { net } => write!(f, "combinational cycle through net #{net}"),
            Error::NotAnInput { net } => write!(f, "net #{net} is not an input node"),
            Error::BadOutput { net } => write!(f, "output #{net} does not exist"),
            Error::FsmBadRole { net, state } => {
                write!(f, "state {state}: net #{net} listed under the wrong role")
            }
            Error::Unscheduled { net } => {
                write!(f, "net #{net} is not scheduled in any state")
            }
            Error::MultiplyScheduled { net } => {
                write!(f, "net #{net} is scheduled in more than one state")
            }
            Error::MissingBinding { mux, state } => {
                write!(f, "state {state}: mux #{mux} has no binding")
            }
            Error::OrderViolation { net, operand, state } => write!(
                f,
                "state {state}: net #{net} reads #{operand}, which is not available there"
            ),
            Error::RegReadBeforeWrite { reg, state } => {
                write!(f, "state {state}: register #{reg} is read before any write")
            }
            Error::MissingInput { net } => write!(f, "no value for input #{net}"),
            Error::NoFsm => write!(f, "circuit has no FSM schedule"),
        }
    }
}

impl Circuit {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NetId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NetId, &Node)> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (NetId(i as u32), n))
    }

    pub fn name(&self, id: NetId) -> &str {
        &self.names[id.index()]
    }

    pub fn net(&self, name: &str) -> Option<NetId> {
        self.by_name.get(name).copied()
    }

    pub fn inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[NetId] {
        &self.outputs
    }

    pub fn fsm(&self) -> Option<&FsmSchedule> {
        self.fsm.as_ref()
    }

    /// Nodes in dependency order; ties broken by net id so the order is
    /// reproducible. Fails on any cycle, registers included: the supported
    /// designs are feed-forward pipelines.
    pub fn topo_order(&self) -> Result<Vec<NetId>, Error> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut fanout: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (i, node) in self.nodes.iter().enumerate() {
            for &op in &node.ops {
                indeg[i] += 1;
                fanout[op.index()].push(i as u32);
            }
        }
        let mut ready: BTreeSet<u32> = (0..n as u32).filter(|&i| indeg[i as usize] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&i) = ready.iter().next() {
            ready.remove(&i);
            order.push(NetId(i));
            for &j in &fanout[i as usize] {
                indeg[j as usize] -= 1;
                if indeg[j as usize] == 0 {
                    ready.insert(j);
                }
            }
        }
        if order.len() != n {
            let stuck = (0..n).find(|&i| indeg[i] > 0).unwrap() as u32;
            return Err(Error::Cycle { net: stuck });
        }
        Ok(order)
    }

    /// Follows MUX chains under `state`'s bindings until a non-MUX net.
    pub fn resolve_operand(&self, mut id: NetId, state: usize) -> Result<NetId, Error> {
        let fsm = self.fsm.as_ref().ok_or(Error::NoFsm)?;
        while self.nodes[id.index()].kind == GateKind::Mux {
            let b = fsm.states[state]
                .mux_bindings
                .get(&id)
                .copied()
                .ok_or(Error::MissingBinding { mux: id.0, state })?;
            id = self.nodes[id.index()].ops[usize::from(b)];
        }
        Ok(id)
    }

    /// Structural and schedule invariants:
    /// operand arities and bounds, acyclicity, input/output consistency and,
    /// with an FSM: role-correct state listings, every datapath op scheduled
    /// exactly once, and every operand (through MUX routing) either a
    /// primary input, a constant, an op of the same state, or a register
    /// written in the same or an earlier state.
    pub fn validate(&self) -> Result<(), Error> {
        let n = self.nodes.len();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.ops.len() != node.kind.arity() {
                return Err(Error::Arity {
                    net: i as u32,
                    expected: node.kind.arity(),
                    got: node.ops.len(),
                });
            }
            for &op in &node.ops {
                if op.index() >= n {
                    return Err(Error::BadOperand {
                        net: i as u32,
                        operand: op.0,
                    });
                }
            }
        }
        for &id in &self.inputs {
            if id.index() >= n {
                return Err(Error::BadOutput { net: id.0 });
            }
            if self.nodes[id.index()].kind != GateKind::Input {
                return Err(Error::NotAnInput { net: id.0 });
            }
        }
        let listed: BTreeSet<NetId> = self.inputs.iter().copied().collect();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.kind == GateKind::Input && !listed.contains(&NetId(i as u32)) {
                return Err(Error::NotAnInput { net: i as u32 });
            }
        }
        for &id in &self.outputs {
            if id.index() >= n {
                return Err(Error::BadOutput { net: id.0 });
            }
        }
        self.topo_order()?;
        if let Some(fsm) = &self.fsm {
            self.validate_schedule(fsm)?;
        }
        Ok(())
    }

    fn validate_schedule(&self, fsm: &FsmSchedule) -> Result<(), Error> {
        let n = self.nodes.len();
        let mut owner: BTreeMap<NetId, usize> = BTreeMap::new();
        for (s, st) in fsm.states.iter().enumerate() {
            for &id in st.active.iter().chain(&st.reg_writes) {
                if id.index() >= n {
                    return Err(Error::BadOperand {
                        net: id.0,
                        operand: id.0,
                    });
                }
                if owner.insert(id, s).is_some() {
                    return Err(Error::MultiplyScheduled { net: id.0 });
                }
            }
            for &id in &st.active {
                match self.nodes[id.index()].kind {
                    GateKind::Input
                    | GateKind::Const0
                    | GateKind::Const1
                    | GateKind::Mux
                    | GateKind::Reg => return Err(Error::FsmBadRole { net: id.0, state: s }),
                    _ => {}
                }
            }
            for &id in &st.reg_writes {
                if self.nodes[id.index()].kind != GateKind::Reg {
                    return Err(Error::FsmBadRole { net: id.0, state: s });
                }
            }
            for (&id, _) in &st.mux_bindings {
                if id.index() >= n || self.nodes[id.index()].kind != GateKind::Mux {
                    return Err(Error::FsmBadRole { net: id.0, state: s });
                }
            }
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let schedulable = !matches!(
                node.kind,
                GateKind::Input | GateKind::Const0 | GateKind::Const1 | GateKind::Mux
            );
            if schedulable && !owner.contains_key(&NetId(i as u32)) {
                return Err(Error::Unscheduled { net: i as u32 });
            }
        }
        for (s, st) in fsm.states.iter().enumerate() {
            for &id in st.active.iter().chain(&st.reg_writes) {
                for &raw in &self.nodes[id.index()].ops {
                    let op = self.resolve_operand(raw, s)?;
                    let node = &self.nodes[op.index()];
                    match node.kind {
                        GateKind::Input | GateKind::Const0 | GateKind::Const1 => {}
                        GateKind::Reg => {
                            let w = owner[&op];
                            if w > s {
                                return Err(Error::RegReadBeforeWrite { reg: op.0, state: s });
                            }
                        }
                        _ => {
                            if owner[&op] != s {
                                return Err(Error::OrderViolation {
                                    net: id.0,
                                    operand: op.0,
                                    state: s,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Rewrites every MUX into XOR(AND(in0, NOT sel), AND(in1, sel)).
    /// The XOR keeps the mux's net id and name; helper nets are appended.
    /// The FSM schedule is dropped: the result models the whole netlist with
    /// selector-driven routing, which is what whole-design analysis sees.
    pub fn lower_mux(&self) -> Circuit {
        let mut nodes = self.nodes.clone();
        let mut names = self.names.clone();
        let mut by_name = self.by_name.clone();
        let muxes: Vec<usize> = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind == GateKind::Mux)
            .map(|(i, _)| i)
            .collect();
        for i in muxes {
            let (in0, in1, sel) = (nodes[i].ops[0], nodes[i].ops[1], nodes[i].ops[2]);
            let fresh = |names: &mut Vec<String>,
                             by_name: &mut BTreeMap<String, NetId>,
                             base: &str,
                             kind: GateKind,
                             ops: Vec<NetId>,
                             nodes: &mut Vec<Node>| {
                let mut name = format!("{}{}", names[i], base);
                while by_name.contains_key(&name) {
                    name.push('_');
                }
                let id = NetId(nodes.len() as u32);
                nodes.push(Node { kind, ops });
                by_name.insert(name.clone(), id);
                names.push(name);
                id
            };
            let ns = fresh(
                &mut names,
                &mut by_name,
                "__ns",
                GateKind::Not,
                vec![sel],
                &mut nodes,
            );
            let a0 = fresh(
                &mut names,
                &mut by_name,
                "__s0",
                GateKind::And,
                vec![in0, ns],
                &mut nodes,
            );
            let a1 = fresh(
                &mut names,
                &mut by_name,
                "__s1",
                GateKind::And,
                vec![in1, sel],
                &mut nodes,
            );
            nodes[i] = Node {
                kind: GateKind::Xor,
                ops: vec![a0, a1],
            };
        }
        Circuit {
            nodes,
            names,
            by_name,
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            fsm: None,
        }
    }

    /// Pure combinational evaluation: registers are transparent and MUX
    /// selects read their selector nets. Used for functional equivalence
    /// checks of feed-forward circuits.
    pub fn comb_eval(&self, inputs: &BTreeMap<NetId, bool>) -> Result<Vec<bool>, Error> {
        let order = self.topo_order()?;
        let mut val = vec![false; self.nodes.len()];
        for id in order {
            let node = &self.nodes[id.index()];
            if node.kind == GateKind::Input {
                val[id.index()] = *inputs
                    .get(&id)
                    .ok_or(Error::MissingInput { net: id.0 })?;
                continue;
            }
            let ops: Vec<bool> = node.ops.iter().map(|o| val[o.index()]).collect();
            val[id.index()] = node.kind.eval(&ops);
        }
        Ok(val)
    }

    /// Evaluates the FSM schedule state by state: each state computes its
    /// active ops with that state's MUX routing, registers latch at the end
    /// of their writing state and hold after. Returns per-state values of
    /// the state's own ops plus the final register/output values.
    pub fn scheduled_eval(&self, inputs: &BTreeMap<NetId, bool>) -> Result<EvalTrace, Error> {
        let fsm = self.fsm.as_ref().ok_or(Error::NoFsm)?;
        let order = self.topo_order()?;
        let mut reg_val: BTreeMap<NetId, bool> = BTreeMap::new();
        let mut per_state: Vec<BTreeMap<NetId, bool>> = Vec::with_capacity(fsm.states.len());
        let mut final_values: BTreeMap<NetId, bool> = BTreeMap::new();
        for (s, st) in fsm.states.iter().enumerate() {
            let mine: BTreeSet<NetId> = st.active.iter().chain(&st.reg_writes).copied().collect();
            let mut local: BTreeMap<NetId, bool> = BTreeMap::new();
            for &id in order.iter().filter(|id| mine.contains(id)) {
                let node = &self.nodes[id.index()];
                let mut ops = Vec::with_capacity(node.ops.len());
                for &raw in &node.ops {
                    let op = self.resolve_operand(raw, s)?;
                    let node = &self.nodes[op.index()];
                    let v = match node.kind {
                        GateKind::Input => *inputs
                            .get(&op)
                            .ok_or(Error::MissingInput { net: op.0 })?,
                        GateKind::Const0 => false,
                        GateKind::Const1 => true,
                        GateKind::Reg => *reg_val
                            .get(&op)
                            .ok_or(Error::RegReadBeforeWrite { reg: op.0, state: s })?,
                        _ => *local.get(&op).ok_or(Error::OrderViolation {
                            net: id.0,
                            operand: op.0,
                            state: s,
                        })?,
                    };
                    ops.push(v);
                }
                let v = node.kind.eval(&ops);
                local.insert(id, v);
                if node.kind == GateKind::Reg {
                    reg_val.insert(id, v);
                }
            }
            per_state.push(local);
        }
        for (&id, &v) in &reg_val {
            final_values.insert(id, v);
        }
        for (s, st) in fsm.states.iter().enumerate() {
            for &out in &self.outputs {
                if st.active.contains(&out) || st.reg_writes.contains(&out) {
                    final_values.insert(out, per_state[s][&out]);
                }
            }
        }
        for &out in &self.outputs {
            if self.nodes[out.index()].kind == GateKind::Input {
                final_values.insert(
                    out,
                    *inputs.get(&out).ok_or(Error::MissingInput { net: out.0 })?,
                );
            }
        }
        Ok(EvalTrace {
            per_state,
            final_values,
        })
    }
}

#[derive(Clone, Debug)]
pub struct EvalTrace {
    /// Values of each state's own ops, indexed by state.
    pub per_state: Vec<BTreeMap<NetId, bool>>,
    /// Final register values and primary output values.
    pub final_values: BTreeMap<NetId, bool>,
}

#[derive(Default)]
pub struct CircuitBuilder {
    nodes: Vec<Node>,
    names: Vec<String>,
    by_name: BTreeMap<String, NetId>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    fsm: Option<FsmSchedule>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a net name with its kind; operands are attached later with
    /// [`CircuitBuilder::set_ops`]. Lets parsers handle forward references.
    pub fn add(&mut self, name: &str, kind: GateKind) -> Result<NetId, Error> {
        if self.by_name.contains_key(name) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        let id = NetId(self.nodes.len() as u32);
        self.nodes.push(Node {
            kind,
            ops: Vec::new(),
        });
        self.names.push(name.to_string());
        self.by_name.insert(name.to_string(), id);
        if kind == GateKind::Input {
            self.inputs.push(id);
        }
        Ok(id)
    }

    pub fn set_ops(&mut self, id: NetId, ops: Vec<NetId>) -> Result<(), Error> {
        let node = &mut self.nodes[id.index()];
        if ops.len() != node.kind.arity() {
            return Err(Error::Arity {
                net: id.0,
                expected: node.kind.arity(),
                got: ops.len(),
            });
        }
        node.ops = ops;
        Ok(())
    }

    pub fn input(&mut self, name: &str) -> Result<NetId, Error> {
        self.add(name, GateKind::Input)
    }

    pub fn node(&mut self, name: &str, kind: GateKind, ops: &[NetId]) -> Result<NetId, Error> {
        let id = self.add(name, kind)?;
        self.set_ops(id, ops.to_vec())?;
        Ok(id)
    }

    pub fn output(&mut self, id: NetId) {
        self.outputs.push(id);
    }

    pub fn net(&self, name: &str) -> Option<NetId> {
        self.by_name.get(name).copied()
    }

    pub fn set_fsm(&mut self, fsm: FsmSchedule) {
        self.fsm = Some(fsm);
    }

    pub fn finish(self) -> Result<Circuit, Error> {
        let c = Circuit {
            nodes: self.nodes,
            names: self.names,
            by_name: self.by_name,
            inputs: self.inputs,
            outputs: self.outputs,
            fsm: self.fsm,
        };
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_pair() -> Circuit {
        let mut b = CircuitBuilder::new();
        let a = b.input("a").unwrap();
        let c = b.input("c").unwrap();
        let x = b.node("x", GateKind::Xor, &[a, c]).unwrap();
        b.output(x);
        b.finish().unwrap()
    }

    #[test]
    fn builder_and_lookup() {
        let c = xor_pair();
        assert_eq!(c.len(), 3);
        assert_eq!(c.net("x"), Some(NetId(2)));
        assert_eq!(c.name(NetId(0)), "a");
        assert_eq!(c.inputs().len(), 2);
    }

    #[test]
    fn arity_is_enforced() {
        let mut b = CircuitBuilder::new();
        let a = b.input("a").unwrap();
        assert!(matches!(
            b.node("x", GateKind::Xor, &[a]),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut b = CircuitBuilder::new();
        b.input("a").unwrap();
        assert!(matches!(b.input("a"), Err(Error::DuplicateName(_))));
    }

    #[test]
    fn cycles_rejected() {
        let mut b = CircuitBuilder::new();
        let x = b.add("x", GateKind::Buf).unwrap();
        let y = b.add("y", GateKind::Buf).unwrap();
        b.set_ops(x, vec![y]).unwrap();
        b.set_ops(y, vec![x]).unwrap();
        assert!(matches!(b.finish(), Err(Error::Cycle { .. })));
    }

    #[test]
    fn topo_is_deterministic_and_ordered() {
        let c = xor_pair();
        let order = c.topo_order().unwrap();
        assert_eq!(order, vec![NetId(0), NetId(1), NetId(2)]);
    }

    #[test]
    fn lower_mux_preserves_function() {
        let mut b = CircuitBuilder::new();
        let i0 = b.input("i0").unwrap();
        let i1 = b.input("i1").unwrap();
        let sel = b.input("sel").unwrap();
        let m = b.node("m", GateKind::Mux, &[i0, i1, sel]).unwrap();
        b.output(m);
        let c = b.finish().unwrap();
        let low = c.lower_mux();
        assert_eq!(low.node(m).kind, GateKind::Xor);
        for bits in 0u32..8 {
            let mut inputs = BTreeMap::new();
            inputs.insert(i0, bits & 1 != 0);
            inputs.insert(i1, bits & 2 != 0);
            inputs.insert(sel, bits & 4 != 0);
            let v0 = c.comb_eval(&inputs).unwrap();
            let v1 = low.comb_eval(&inputs).unwrap();
            assert_eq!(v0[m.index()], v1[m.index()]);
        }
    }

    fn two_state() -> (Circuit, NetId, NetId, NetId, NetId) {
        // State 0 computes r = REG(a AND b); state 1 computes y = r XOR b.
        let mut b = CircuitBuilder::new();
        let a = b.input("a").unwrap();
        let bb = b.input("b").unwrap();
        let p = b.node("p", GateKind::And, &[a, bb]).unwrap();
        let r = b.node("r", GateKind::Reg, &[p]).unwrap();
        let y = b.node("y", GateKind::Xor, &[r, bb]).unwrap();
        b.output(y);
        b.set_fsm(FsmSchedule {
            states: vec![
                FsmState {
                    name: "0".into(),
                    active: vec![p],
                    reg_writes: vec![r],
                    mux_bindings: BTreeMap::new(),
                },
                FsmState {
                    name: "1".into(),
                    active: vec![y],
                    reg_writes: vec![],
                    mux_bindings: BTreeMap::new(),
                },
            ],
        });
        (b.finish().unwrap(), a, bb, r, y)
    }

    #[test]
    fn scheduled_eval_latches_registers() {
        let (c, a, b, _r, y) = two_state();
        let mut inputs = BTreeMap::new();
        inputs.insert(a, true);
        inputs.insert(b, true);
        let t = c.scheduled_eval(&inputs).unwrap();
        assert_eq!(t.final_values[&y], false); // (1&1) ^ 1
        inputs.insert(b, false);
        let t = c.scheduled_eval(&inputs).unwrap();
        assert_eq!(t.final_values[&y], false); // (1&0) ^ 0
    }

    #[test]
    fn schedule_rejects_comb_read_across_states() {
        let mut b = CircuitBuilder::new();
        let a = b.input("a").unwrap();
        let p = b.node("p", GateKind::Buf, &[a]).unwrap();
        let q = b.node("q", GateKind::Not, &[p]).unwrap();
        b.output(q);
        b.set_fsm(FsmSchedule {
            states: vec![
                FsmState {
                    name: "0".into(),
                    active: vec![p],
                    ..Default::default()
                },
                FsmState {
                    name: "1".into(),
                    active: vec![q],
                    ..Default::default()
                },
            ],
        });
        assert!(matches!(b.finish(), Err(Error::OrderViolation { .. })));
    }

    #[test]
    fn schedule_requires_every_op_once() {
        let mut b = CircuitBuilder::new();
        let a = b.input("a").unwrap();
        let p = b.node("p", GateKind::Buf, &[a]).unwrap();
        b.output(p);
        b.set_fsm(FsmSchedule {
            states: vec![FsmState {
                name: "0".into(),
                ..Default::default()
            }],
        });
        assert!(matches!(b.finish(), Err(Error::Unscheduled { .. })));
        let mut b = CircuitBuilder::new();
        let a = b.input("a").unwrap();
        let p = b.node("p", GateKind::Buf, &[a]).unwrap();
        b.output(p);
        b.set_fsm(FsmSchedule {
            states: vec![
                FsmState {
                    name: "0".into(),
                    active: vec![p],
                    ..Default::default()
                },
                FsmState {
                    name: "1".into(),
                    active: vec![p],
                    ..Default::default()
                },
            ],
        });
        assert!(matches!(b.finish(), Err(Error::MultiplyScheduled { .. })));
    }

    #[test]
    fn mux_kept_out_of_active_lists() {
        let mut b = CircuitBuilder::new();
        let a = b.input("a").unwrap();
        let c = b.input("c").unwrap();
        let s = b.input("s").unwrap();
        let m = b.node("m", GateKind::Mux, &[a, c, s]).unwrap();
        let y = b.node("y", GateKind::Buf, &[m]).unwrap();
        b.output(y);
        b.set_fsm(FsmSchedule {
            states: vec![FsmState {
                name: "0".into(),
                active: vec![m, y],
                ..Default::default()
            }],
        });
        assert!(matches!(b.finish(), Err(Error::FsmBadRole { .. })));
    }

    #[test]
    fn mux_binding_resolution() {
        let mut b = CircuitBuilder::new();
        let a = b.input("a").unwrap();
        let c = b.input("c").unwrap();
        let s = b.input("s").unwrap();
        let m = b.node("m", GateKind::Mux, &[a, c, s]).unwrap();
        let y0 = b.node("y0", GateKind::Buf, &[m]).unwrap();
        let y1 = b.node("y1", GateKind::Buf, &[m]).unwrap();
        b.output(y0);
        b.output(y1);
        let mut bind0 = BTreeMap::new();
        bind0.insert(m, false);
        let mut bind1 = BTreeMap::new();
        bind1.insert(m, true);
        b.set_fsm(FsmSchedule {
            states: vec![
                FsmState {
                    name: "0".into(),
                    active: vec![y0],
                    reg_writes: vec![],
                    mux_bindings: bind0,
                },
                FsmState {
                    name: "1".into(),
                    active: vec![y1],
                    reg_writes: vec![],
                    mux_bindings: bind1,
                },
            ],
        });
        let circ = b.finish().unwrap();
        assert_eq!(circ.resolve_operand(m, 0).unwrap(), a);
        assert_eq!(circ.resolve_operand(m, 1).unwrap(), c);
        let mut inputs = BTreeMap::new();
        inputs.insert(a, true);
        inputs.insert(c, false);
        inputs.insert(s, false);
        let t = circ.scheduled_eval(&inputs).unwrap();
        assert_eq!(t.final_values[&y0], true);
        assert_eq!(t.final_values[&y1], false);
    }
}
