//! Correlation-set label propagation.
//!
//! Every net carries a set of monomials over statistical base variables,
//! over-approximating the support of the net's Fourier expansion in the
//! plus/minus-one value domain (where XOR is multiplication and squares
//! cancel). A net is reported insecure when its set contains a monomial
//! with at least one secret and no mask of any kind.

use crate::circuit::{Circuit, GateKind, NetId};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Default per-net monomial budget before analysis aborts.
pub const DEFAULT_SET_CAP: usize = 1 << 20;

/// A statistical base variable of the input encoding. Ordering puts secrets
/// first, then the implicit sharing masks, free masks, and publics, so set
/// displays and leak reports are stable.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum BaseVar {
    /// Unshared secret value, by secret id.
    Secret(u32),
    /// Mask implicit in a secret's sharing: share j+1 of the secret, for
    /// j in 1..share_count.
    ShareMask(u32, u32),
    /// Freely drawn mask input, by net id.
    Mask(u32),
    /// Adversary-known input, by net id.
    Public(u32),
}

impl BaseVar {
    pub fn is_secret(self) -> bool {
        matches!(self, BaseVar::Secret(_))
    }

    pub fn is_mask(self) -> bool {
        matches!(self, BaseVar::ShareMask(..) | BaseVar::Mask(_))
    }
}

/// Duplicate-free product of base variables (squares cancel in the
/// plus/minus-one domain, so a set suffices).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Monomial(BTreeSet<BaseVar>);

impl Monomial {
    pub fn empty() -> Self {
        Monomial(BTreeSet::new())
    }

    pub fn from_vars<I: IntoIterator<Item = BaseVar>>(vars: I) -> Self {
        Monomial(vars.into_iter().collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = &BaseVar> {
        self.0.iter()
    }

    pub fn contains(&self, v: &BaseVar) -> bool {
        self.0.contains(v)
    }

    /// Product in the plus/minus-one domain: symmetric difference.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.symmetric_difference(&other.0).copied().collect())
    }

    pub fn has_secret(&self) -> bool {
        self.0.iter().any(|v| v.is_secret())
    }

    pub fn has_mask(&self) -> bool {
        self.0.iter().any(|v| v.is_mask())
    }

    /// Secret-dependent but unmasked: correlates with a secret.
    pub fn is_leaky(&self) -> bool {
        self.has_secret() && !self.has_mask()
    }
}

pub type CorrelationSet = BTreeSet<Monomial>;

/// Signals that a product exceeded the per-net monomial budget.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CapExceeded;

/// Pairwise products of two correlation sets. With `augment`, each side is
/// first extended with the empty monomial, which accounts for the gate
/// output possibly correlating with either operand alone (non-linear gates
/// and anything a glitch may expose).
pub fn set_product(
    a: &CorrelationSet,
    b: &CorrelationSet,
    augment: bool,
    cap: usize,
) -> Result<CorrelationSet, CapExceeded> {
    let phi = Monomial::empty();
    let extra = if augment { Some(&phi) } else { None };
    let mut out = CorrelationSet::new();
    for ma in a.iter().chain(extra) {
        for mb in b.iter().chain(extra) {
            out.insert(ma.mul(mb));
            if out.len() > cap {
                return Err(CapExceeded);
            }
        }
    }
    Ok(out)
}

/// How an input net participates in the masking scheme.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Role {
    /// Share `index` (1-based) of the secret with the given id.
    Share { secret: u32, index: u32 },
    Mask,
    Public,
}

/// Assignment of roles to every primary input, plus the secret name table.
///
/// `declared` pins the share count of secrets inherited from an enclosing
/// design, where restriction may have dropped some shares; without it a
/// lone share 1 would read as an unshared secret.
#[derive(Clone, Debug, Default)]
pub struct Labeling {
    roles: BTreeMap<NetId, Role>,
    secret_names: Vec<String>,
    declared: BTreeMap<u32, u32>,
}

impl Labeling {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns a secret name, returning its id.
    pub fn secret_id(&mut self, name: &str) -> u32 {
        if let Some(i) = self.secret_names.iter().position(|n| n == name) {
            return i as u32;
        }
        self.secret_names.push(name.to_string());
        self.secret_names.len() as u32 - 1
    }

    pub fn secret_name(&self, id: u32) -> Option<&str> {
        self.secret_names.get(id as usize).map(|s| s.as_str())
    }

    pub fn secret_count(&self) -> usize {
        self.secret_names.len()
    }

    pub fn assign(&mut self, net: NetId, role: Role) {
        self.roles.insert(net, role);
    }

    pub fn role(&self, net: NetId) -> Option<Role> {
        self.roles.get(&net).copied()
    }

    pub fn roles(&self) -> impl Iterator<Item = (&NetId, &Role)> {
        self.roles.iter()
    }

    /// Pins a secret's total share count independent of the roles present,
    /// marking the absent indices as held by an enclosing design.
    pub fn declare_shares(&mut self, secret: u32, count: u32) {
        self.declared.insert(secret, count);
    }

    /// Share count per secret id: the declared count where present,
    /// otherwise the highest assigned share index.
    pub fn share_counts(&self) -> BTreeMap<u32, u32> {
        let mut counts = self.declared.clone();
        for role in self.roles.values() {
            if let Role::Share { secret, index } = role {
                let e = counts.entry(*secret).or_insert(0);
                *e = (*e).max(*index);
            }
        }
        counts
    }

    /// Projection onto a sub-circuit: keeps the roles of surviving inputs
    /// with net ids rewritten through `map`, the secret name table, and the
    /// enclosing design's share counts, so shares keep their full encoding
    /// even when sibling shares did not survive.
    pub fn restrict<F: Fn(NetId) -> Option<NetId>>(&self, map: F) -> Labeling {
        let mut out = Labeling {
            roles: BTreeMap::new(),
            secret_names: self.secret_names.clone(),
            declared: self.share_counts(),
        };
        for (&net, &role) in &self.roles {
            if let Some(new) = map(net) {
                out.roles.insert(new, role);
            }
        }
        out
    }

    /// Base monomial of each primary input. Share 1 of an n-share secret
    /// carries the secret together with all n-1 sharing masks; share j > 1
    /// carries sharing mask j-1 alone, so the shares XOR back to the secret.
    pub fn input_monomials(&self, c: &Circuit) -> Result<BTreeMap<NetId, Monomial>, Error> {
        self.check(c)?;
        let counts = self.share_counts();
        let mut out = BTreeMap::new();
        for (&net, &role) in &self.roles {
            let mono = match role {
                Role::Share { secret, index } => {
                    if index == 1 {
                        let mut vars = vec![BaseVar::Secret(secret)];
                        for k in 1..counts[&secret] {
                            vars.push(BaseVar::ShareMask(secret, k));
                        }
                        Monomial::from_vars(vars)
                    } else {
                        Monomial::from_vars([BaseVar::ShareMask(secret, index - 1)])
                    }
                }
                Role::Mask => Monomial::from_vars([BaseVar::Mask(net.raw())]),
                Role::Public => Monomial::from_vars([BaseVar::Public(net.raw())]),
            };
            out.insert(net, mono);
        }
        Ok(out)
    }

    /// All base variables of the encoding, in their natural order.
    pub fn base_vars(&self, c: &Circuit) -> Result<Vec<BaseVar>, Error> {
        let monos = self.input_monomials(c)?;
        let mut vars: BTreeSet<BaseVar> = BTreeSet::new();
        for m in monos.values() {
            vars.extend(m.vars().copied());
        }
        Ok(vars.into_iter().collect())
    }

    /// Validate the labeling against a circuit: every primary input has
    /// a role, no role names a non-input net, and share indices per
    /// secret are duplicate-free with no gaps from 1.
    pub fn check(&self, c: &Circuit) -> Result<(), Error> {
        for &net in c.inputs() {
            if !self.roles.contains_key(&net) {
                return Err(Error::MissingRole { net: net.raw() });
            }
        }
        for &net in self.roles.keys() {
            if net.index() >= c.len() || c.node(net).kind != GateKind::Input {
                return Err(Error::NotAnInput { net: net.raw() });
            }
        }
        let mut seen: BTreeSet<(u32, u32)> = BTreeSet::new();
        for role in self.roles.values() {
            if let Role::Share { secret, index } = role {
                if *index == 0 {
                    return Err(Error::ShareGap {
                        secret: *secret,
                        index: 0,
                    });
                }
                if !seen.insert((*secret, *index)) {
                    return Err(Error::DuplicateShare {
                        secret: *secret,
                        index: *index,
                    });
                }
            }
        }
        let counts = self.share_counts();
        for (&secret, &n) in &counts {
            if self.declared.contains_key(&secret) {
                continue;
            }
            for index in 1..=n {
                if !seen.contains(&(secret, index)) {
                    return Err(Error::ShareGap { secret, index });
                }
            }
        }
        Ok(())
    }

    /// Human-readable name of a base variable.
    pub fn var_name(&self, c: &Circuit, v: &BaseVar) -> String {
        match v {
            BaseVar::Secret(s) => self
                .secret_name(*s)
                .map(|n| n.to_string())
                .unwrap_or_else(|| format!("secret{s}")),
            BaseVar::ShareMask(s, k) => {
                let name = self
                    .secret_name(*s)
                    .map(|n| n.to_string())
                    .unwrap_or_else(|| format!("secret{s}"));
                format!("{name}#m{k}")
            }
            BaseVar::Mask(net) | BaseVar::Public(net) => {
                let id = NetId::from_raw(*net);
                if id.index() < c.len() {
                    c.name(id).to_string()
                } else {
                    format!("net{net}")
                }
            }
        }
    }
}

/// Which leakage each probe on a net is assumed to observe.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Model {
    /// Settled values only.
    Stable,
    /// Glitch-extended: a probe may combine everything in the net's
    /// combinational fan-in back to registers and primary inputs.
    Transient,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Stable => "stable",
            Model::Transient => "transient",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Error {
    MissingRole { net: u32 },
    NotAnInput { net: u32 },
    DuplicateShare { secret: u32, index: u32 },
    ShareGap { secret: u32, index: u32 },
    MuxPresent { net: u32 },
    CapExceeded { net: u32, size: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::MissingRole { net } => write!(f, "input #{net} has no label"),
            Error::NotAnInput { net } => write!(f, "labeled net #{net} is not an input"),
            Error::DuplicateShare { secret, index } => {
                write!(f, "share {index} of secret {secret} assigned twice")
            }
            Error::ShareGap { secret, index } => {
                write!(f, "share {index} of secret {secret} is missing")
            }
            Error::MuxPresent { net } => write!(
                f,
                "net #{net} is a MUX; lower or fold muxes before label propagation"
            ),
            Error::CapExceeded { net, size } => write!(
                f,
                "correlation set of net #{net} exceeded the cap ({size} monomials)"
            ),
        }
    }
}

/// Per-net correlation sets under the given model.
///
/// Stable: XOR-like gates take the plain pairwise product, non-linear gates
/// the augmented product, registers and buffers copy their operand.
/// Transient: every two-operand gate takes the augmented product of its
/// operands' transient sets; a register output is a synchronization point
/// and carries the stable set of its operand.
pub fn propagate(
    c: &Circuit,
    l: &Labeling,
    model: Model,
    cap: usize,
) -> Result<Vec<CorrelationSet>, Error> {
    let inputs = l.input_monomials(c)?;
    let stable = propagate_pass(c, &inputs, Model::Stable, None, cap)?;
    match model {
        Model::Stable => Ok(stable),
        Model::Transient => propagate_pass(c, &inputs, Model::Transient, Some(&stable), cap),
    }
}

/// Like [`verify`], but returns as soon as one leak is found.
///
/// Sets are built net by net in topological order and each is checked
/// immediately, so nets past the first leaky one are never labeled. On a
/// secure circuit this does the same work as [`verify`]; on a circuit
/// that recombines shares near its inputs (lowered operand muxes of a
/// shared unit, typically) it answers without building the large sets
/// further downstream.
pub fn verify_any(
    c: &Circuit,
    l: &Labeling,
    model: Model,
    order: u8,
    cap: usize,
) -> Result<Verdict, Error> {
    assert!(order == 1 || order == 2, "supported attack orders: 1, 2");
    let inputs = l.input_monomials(c)?;
    let topo = c.topo_order().expect("validated circuit");
    let mut stable_sets: Vec<CorrelationSet> = vec![CorrelationSet::new(); c.len()];
    let mut trans_sets: Vec<CorrelationSet> = if model == Model::Transient {
        vec![CorrelationSet::new(); c.len()]
    } else {
        Vec::new()
    };
    let mut verdict = Verdict::default();
    for id in topo {
        let s = step(c, id, &inputs, Model::Stable, &stable_sets, None, cap)?;
        stable_sets[id.index()] = s;
        let set = match model {
            Model::Stable => &stable_sets[id.index()],
            Model::Transient => {
                let t = step(
                    c,
                    id,
                    &inputs,
                    Model::Transient,
                    &trans_sets,
                    Some(&stable_sets),
                    cap,
                )?;
                trans_sets[id.index()] = t;
                &trans_sets[id.index()]
            }
        };
        verdict.checked_nets += 1;
        if let Some(m) = check_leak(set) {
            verdict.leaks.push(Leak {
                net: id,
                pair: None,
                monomial: m.clone(),
            });
            break;
        }
    }
    // Digraph counts cover the sets built up to the stop point; unbuilt
    // sets are empty and count as untouched.
    let sets = match model {
        Model::Stable => &stable_sets,
        Model::Transient => &trans_sets,
    };
    count_digraph(c, sets, &mut verdict);
    if !verdict.leaks.is_empty() {
        return Ok(verdict);
    }
    if order == 2 {
        for i in 0..c.len() {
            for j in (i + 1)..c.len() {
                verdict.checked_pairs += 1;
                let joint = set_product(&sets[i], &sets[j], true, cap).map_err(|CapExceeded| {
                    Error::CapExceeded {
                        net: i as u32,
                        size: cap,
                    }
                })?;
                if let Some(m) = check_leak(&joint) {
                    verdict.leaks.push(Leak {
                        net: NetId::from_raw(i as u32),
                        pair: Some(NetId::from_raw(j as u32)),
                        monomial: m.clone(),
                    });
                    return Ok(verdict);
                }
            }
        }
    }
    Ok(verdict)
}

fn propagate_pass(
    c: &Circuit,
    inputs: &BTreeMap<NetId, Monomial>,
    model: Model,
    stable: Option<&[CorrelationSet]>,
    cap: usize,
) -> Result<Vec<CorrelationSet>, Error> {
    let order = c.topo_order().expect("validated circuit");
    let mut sets: Vec<CorrelationSet> = vec![CorrelationSet::new(); c.len()];
    for id in order {
        sets[id.index()] = step(c, id, inputs, model, &sets, stable, cap)?;
    }
    Ok(sets)
}

// One net's set, assuming all topologically earlier sets are filled in.
fn step(
    c: &Circuit,
    id: NetId,
    inputs: &BTreeMap<NetId, Monomial>,
    model: Model,
    sets: &[CorrelationSet],
    stable: Option<&[CorrelationSet]>,
    cap: usize,
) -> Result<CorrelationSet, Error> {
    let node = c.node(id);
    Ok(match node.kind {
        GateKind::Input => {
            let mono = inputs[&id].clone();
            CorrelationSet::from([mono])
        }
        GateKind::Const0 | GateKind::Const1 => CorrelationSet::from([Monomial::empty()]),
        GateKind::Buf | GateKind::Not => sets[node.ops[0].index()].clone(),
        GateKind::Reg => match model {
            Model::Stable => sets[node.ops[0].index()].clone(),
            Model::Transient => stable.expect("stable pass first")[node.ops[0].index()].clone(),
        },
        GateKind::Mux => return Err(Error::MuxPresent { net: id.raw() }),
        GateKind::Xor | GateKind::Xnor => {
            let augment = model == Model::Transient;
            product_at(c, sets, id, augment, cap)?
        }
        GateKind::And | GateKind::Nand | GateKind::Or | GateKind::Nor => {
            product_at(c, sets, id, true, cap)?
        }
    })
}

fn product_at(
    c: &Circuit,
    sets: &[CorrelationSet],
    id: NetId,
    augment: bool,
    cap: usize,
) -> Result<CorrelationSet, Error> {
    let node = c.node(id);
    let a = &sets[node.ops[0].index()];
    let b = &sets[node.ops[1].index()];
    set_product(a, b, augment, cap).map_err(|CapExceeded| Error::CapExceeded {
        net: id.raw(),
        size: cap,
    })
}

/// First leaky monomial of a set, in monomial order.
pub fn check_leak(set: &CorrelationSet) -> Option<&Monomial> {
    set.iter().find(|m| m.is_leaky())
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Leak {
    pub net: NetId,
    /// Second net of an order-2 probe pair; absent for single-net leaks.
    pub pair: Option<NetId>,
    pub monomial: Monomial,
}

#[derive(Clone, Debug, Default)]
pub struct Verdict {
    pub leaks: Vec<Leak>,
    pub checked_nets: usize,
    pub checked_pairs: usize,
    /// Nets whose set mentions any secret (the secret-reaching digraph).
    pub digraph_nodes: usize,
    /// Operand edges with both endpoints in that digraph.
    pub digraph_edges: usize,
}

impl Verdict {
    pub fn secure(&self) -> bool {
        self.leaks.is_empty()
    }
}

fn count_digraph(c: &Circuit, sets: &[CorrelationSet], verdict: &mut Verdict) {
    let touched: Vec<bool> = sets
        .iter()
        .map(|s| s.iter().any(|m| m.has_secret()))
        .collect();
    for (id, node) in c.nodes() {
        if !touched[id.index()] {
            continue;
        }
        verdict.digraph_nodes += 1;
        verdict.digraph_edges += node
            .ops
            .iter()
            .filter(|o| touched[o.index()])
            .count();
    }
}

/// Full check of a mux-free circuit under one model at the given attack
/// order (1 or 2). Order 2 additionally examines the augmented product of
/// every unordered pair of distinct nets, modeling two simultaneous probes.
pub fn verify(
    c: &Circuit,
    l: &Labeling,
    model: Model,
    order: u8,
    cap: usize,
) -> Result<Verdict, Error> {
    assert!(order == 1 || order == 2, "supported attack orders: 1, 2");
    let sets = propagate(c, l, model, cap)?;
    let mut verdict = Verdict::default();
    count_digraph(c, &sets, &mut verdict);
    for (id, _) in c.nodes() {
        verdict.checked_nets += 1;
        if let Some(m) = check_leak(&sets[id.index()]) {
            verdict.leaks.push(Leak {
                net: id,
                pair: None,
                monomial: m.clone(),
            });
        }
    }
    if order == 2 {
        for i in 0..c.len() {
            for j in (i + 1)..c.len() {
                verdict.checked_pairs += 1;
                let joint = set_product(&sets[i], &sets[j], true, cap).map_err(|CapExceeded| {
                    Error::CapExceeded {
                        net: i as u32,
                        size: cap,
                    }
                })?;
                if let Some(m) = check_leak(&joint) {
                    verdict.leaks.push(Leak {
                        net: NetId::from_raw(i as u32),
                        pair: Some(NetId::from_raw(j as u32)),
                        monomial: m.clone(),
                    });
                }
            }
        }
    }
    Ok(verdict)
}
