//! State-wise splitting of controller-datapath designs: per FSM state,
//! extracts the sub-design of that state's operations plus everything they
//! depend on through earlier states, with MUXes folded to the routing of
//! the state each consumer executes in.

use crate::circuit::{Circuit, CircuitBuilder, Error, FsmSchedule, GateKind, NetId};
use crate::label::Labeling;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

/// A per-state extracted circuit. Acyclic, MUX-free, registers retained as
/// synchronization pass-throughs. `origin` maps each net back to the net of
/// the enclosing design it was extracted from.
#[derive(Clone, Debug)]
pub struct SubDesign {
    pub state: String,
    pub state_index: usize,
    pub circuit: Circuit,
    pub labeling: Labeling,
    pub origin: Vec<NetId>,
}

impl SubDesign {
    /// Original net behind a sub-design net.
    pub fn origin_of(&self, id: NetId) -> NetId {
        self.origin[id.index()]
    }
}

fn owner_map(fsm: &FsmSchedule) -> BTreeMap<NetId, usize> {
    let mut owner = BTreeMap::new();
    for (s, st) in fsm.states.iter().enumerate() {
        for &id in st.active.iter().chain(&st.reg_writes) {
            owner.insert(id, s);
        }
    }
    owner
}

/// Operations executing in a state: its active datapath ops plus the
/// registers it writes.
pub fn active_ops(c: &Circuit, state: usize) -> Result<BTreeSet<NetId>, Error> {
    let fsm = c.fsm().ok_or(Error::NoFsm)?;
    let st = &fsm.states[state];
    Ok(st.active.iter().chain(&st.reg_writes).copied().collect())
}

/// States whose results `state` depends on, itself included: reading a
/// register written earlier pulls in the whole writing state, recursively.
pub fn dependency_closure(c: &Circuit, state: usize) -> Result<BTreeSet<usize>, Error> {
    let fsm = c.fsm().ok_or(Error::NoFsm)?;
    let owner = owner_map(fsm);
    let mut closure = BTreeSet::from([state]);
    let mut work = alloc::vec![state];
    while let Some(s) = work.pop() {
        for op in active_ops(c, s)? {
            for &raw in &c.node(op).ops {
                let r = c.resolve_operand(raw, s)?;
                if c.node(r).kind == GateKind::Reg {
                    let w = owner[&r];
                    if closure.insert(w) {
                        work.push(w);
                    }
                }
            }
        }
    }
    Ok(closure)
}

/// Builds the sub-design of one state: the induced circuit over its
/// dependency closure, operands folded through each consumer state's MUX
/// routing, inputs reduced to the primary inputs actually read, outputs
/// the state's register writes plus any primary outputs it drives.
pub fn extract_subdesign(c: &Circuit, l: &Labeling, state: usize) -> Result<SubDesign, Error> {
    let fsm = c.fsm().ok_or(Error::NoFsm)?;
    let states = dependency_closure(c, state)?;
    let mut keep: BTreeMap<NetId, usize> = BTreeMap::new();
    for &s in &states {
        for op in active_ops(c, s)? {
            keep.insert(op, s);
        }
    }
    let mut sources: BTreeSet<NetId> = BTreeSet::new();
    for (&op, &s) in &keep {
        for &raw in &c.node(op).ops {
            let r = c.resolve_operand(raw, s)?;
            if matches!(
                c.node(r).kind,
                GateKind::Input | GateKind::Const0 | GateKind::Const1
            ) {
                sources.insert(r);
            }
        }
    }
    let mut b = CircuitBuilder::new();
    let mut map: BTreeMap<NetId, NetId> = BTreeMap::new();
    let mut origin: Vec<NetId> = Vec::new();
    for id in c.topo_order()? {
        let owned = keep.get(&id).copied();
        if owned.is_none() && !sources.contains(&id) {
            continue;
        }
        let new_id = b.add(c.name(id), c.node(id).kind)?;
        if let Some(s) = owned {
            let mut ops = Vec::with_capacity(c.node(id).ops.len());
            for &raw in &c.node(id).ops {
                ops.push(map[&c.resolve_operand(raw, s)?]);
            }
            b.set_ops(new_id, ops)?;
        }
        map.insert(id, new_id);
        origin.push(id);
    }
    let st = &fsm.states[state];
    let mut emitted: BTreeSet<NetId> = BTreeSet::new();
    for &r in &st.reg_writes {
        if emitted.insert(map[&r]) {
            b.output(map[&r]);
        }
    }
    for &o in c.outputs() {
        if keep.get(&o) == Some(&state) && emitted.insert(map[&o]) {
            b.output(map[&o]);
        }
    }
    let labeling = l.restrict(|old| map.get(&old).copied());
    Ok(SubDesign {
        state: st.name.clone(),
        state_index: state,
        circuit: b.finish()?,
        labeling,
        origin,
    })
}

/// One sub-design per FSM state, in state order.
pub fn split_all(c: &Circuit, l: &Labeling) -> Result<Vec<SubDesign>, Error> {
    let fsm = c.fsm().ok_or(Error::NoFsm)?;
    (0..fsm.states.len())
        .map(|s| extract_subdesign(c, l, s))
        .collect()
}

/// Scheduled operations backward-reachable from any state's results (its
/// register writes and the primary outputs): the set every complete family
/// of sub-designs must jointly cover.
pub fn scheduled_support(c: &Circuit) -> Result<BTreeSet<NetId>, Error> {
    let fsm = c.fsm().ok_or(Error::NoFsm)?;
    let owner = owner_map(fsm);
    let mut reach: BTreeSet<NetId> = BTreeSet::new();
    let mut work: Vec<NetId> = Vec::new();
    let seed = |id: NetId, reach: &mut BTreeSet<NetId>, work: &mut Vec<NetId>| {
        if owner.contains_key(&id) && reach.insert(id) {
            work.push(id);
        }
    };
    for st in &fsm.states {
        for &r in &st.reg_writes {
            seed(r, &mut reach, &mut work);
        }
    }
    for &o in c.outputs() {
        seed(o, &mut reach, &mut work);
    }
    while let Some(id) = work.pop() {
        let s = owner[&id];
        for &raw in &c.node(id).ops {
            let r = c.resolve_operand(raw, s)?;
            seed(r, &mut reach, &mut work);
        }
    }
    Ok(reach)
}
