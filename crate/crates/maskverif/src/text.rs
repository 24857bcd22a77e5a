//! Line-oriented textual formats.
//!
//! Netlist grammar (UTF-8, `#` comments to end of line, statements end
//! with `;`):
//!
//! ```text
//! input <id> ;
//! output <id> ;
//! wire <id> = <KIND> <op1> [<op2> [<op3>]] ;
//! reg <id> = REG <op> ;
//! fsm { state <name> { active: id, id ; regwrite: id ; mux <id> = 0 ; } }
//! ```
//!
//! Label files carry one entry per line: `<net>: share <k> of <secret>`,
//! `<net>: mask`, or `<net>: public`.
//!
//! `parse_netlist` and `dump_netlist` are mutually inverse on canonical
//! text; operands may reference nets declared later in the file.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use maskverif_core::circuit::{
    Circuit, CircuitBuilder, Error as CircuitError, FsmSchedule, FsmState, GateKind, NetId,
};
use maskverif_core::label::{Error as LabelError, Labeling, Role};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, col {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    fn new(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError { line, col, msg: msg.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Tok {
    text: String,
    line: usize,
    col: usize,
}

fn tokenize(src: &str) -> Vec<Tok> {
    let mut toks = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let mut word = String::new();
        let mut word_col = 0;
        for (ci, ch) in line.chars().enumerate() {
            let punct = matches!(ch, ';' | '=' | '{' | '}' | ':' | ',');
            if ch.is_whitespace() || punct {
                if !word.is_empty() {
                    toks.push(Tok { text: std::mem::take(&mut word), line: ln + 1, col: word_col + 1 });
                }
                if punct {
                    toks.push(Tok { text: ch.to_string(), line: ln + 1, col: ci + 1 });
                }
            } else {
                if word.is_empty() {
                    word_col = ci;
                }
                word.push(ch);
            }
        }
        if !word.is_empty() {
            toks.push(Tok { text: word, line: ln + 1, col: word_col + 1 });
        }
    }
    toks
}

struct Cursor {
    toks: Vec<Tok>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eof_err(&self, what: &str) -> ParseError {
        let (line, col) = self
            .toks
            .last()
            .map(|t| (t.line, t.col + t.text.len()))
            .unwrap_or((1, 1));
        ParseError::new(line, col, format!("expected {what}, found end of input"))
    }

    fn expect_word(&mut self, what: &str) -> Result<Tok, ParseError> {
        match self.next() {
            Some(t) if !is_punct(&t.text) => Ok(t),
            Some(t) => Err(ParseError::new(t.line, t.col, format!("expected {what}, found `{}`", t.text))),
            None => Err(self.eof_err(what)),
        }
    }

    fn expect(&mut self, lit: &str) -> Result<Tok, ParseError> {
        match self.next() {
            Some(t) if t.text == lit => Ok(t),
            Some(t) => Err(ParseError::new(t.line, t.col, format!("expected `{lit}`, found `{}`", t.text))),
            None => Err(self.eof_err(&format!("`{lit}`"))),
        }
    }
}

fn is_punct(s: &str) -> bool {
    matches!(s, ";" | "=" | "{" | "}" | ":" | ",")
}

// Statement forms after pass 1; operands are still names because they may
// be declared later in the file.
enum Stmt {
    Decl { name: Tok, kind: GateKind, ops: Vec<Tok> },
    Output(Tok),
}

struct FsmStmt {
    name: String,
    active: Vec<Tok>,
    regwrite: Vec<Tok>,
    mux: Vec<(Tok, bool)>,
}

/// Parse netlist source into a validated circuit.
pub fn parse_netlist(src: &str) -> Result<Circuit, ParseError> {
    let mut cur = Cursor { toks: tokenize(src), pos: 0 };
    let mut stmts: Vec<Stmt> = Vec::new();
    let mut fsm: Option<Vec<FsmStmt>> = None;
    while let Some(head) = cur.next() {
        match head.text.as_str() {
            "input" => {
                let name = cur.expect_word("net name")?;
                cur.expect(";")?;
                stmts.push(Stmt::Decl { name, kind: GateKind::Input, ops: Vec::new() });
            }
            "output" => {
                let name = cur.expect_word("net name")?;
                cur.expect(";")?;
                stmts.push(Stmt::Output(name));
            }
            "wire" | "reg" => {
                let name = cur.expect_word("net name")?;
                cur.expect("=")?;
                let kind_tok = cur.expect_word("gate kind")?;
                let kind = GateKind::from_name(&kind_tok.text).ok_or_else(|| {
                    ParseError::new(kind_tok.line, kind_tok.col, format!("unknown gate kind `{}`", kind_tok.text))
                })?;
                if head.text == "reg" && kind != GateKind::Reg {
                    return Err(ParseError::new(kind_tok.line, kind_tok.col, "`reg` statements take kind REG"));
                }
                if head.text == "wire" && matches!(kind, GateKind::Reg | GateKind::Input) {
                    return Err(ParseError::new(
                        kind_tok.line,
                        kind_tok.col,
                        format!("kind {} needs its own statement form", kind.name()),
                    ));
                }
                let mut ops = Vec::new();
                loop {
                    match cur.peek() {
                        Some(t) if t.text == ";" => {
                            cur.next();
                            break;
                        }
                        Some(t) if !is_punct(&t.text) => ops.push(cur.next().unwrap()),
                        Some(t) => {
                            return Err(ParseError::new(t.line, t.col, format!("expected operand or `;`, found `{}`", t.text)))
                        }
                        None => return Err(cur.eof_err("`;`")),
                    }
                }
                if ops.len() != kind.arity() {
                    return Err(ParseError::new(
                        name.line,
                        name.col,
                        format!("{} takes {} operands, got {}", kind.name(), kind.arity(), ops.len()),
                    ));
                }
                stmts.push(Stmt::Decl { name, kind, ops });
            }
            "fsm" => {
                if fsm.is_some() {
                    return Err(ParseError::new(head.line, head.col, "duplicate fsm block"));
                }
                fsm = Some(parse_fsm_block(&mut cur)?);
            }
            other => {
                return Err(ParseError::new(head.line, head.col, format!("expected statement keyword, found `{other}`")))
            }
        }
    }

    let mut b = CircuitBuilder::new();
    let mut declared: BTreeMap<String, (NetId, usize, usize)> = BTreeMap::new();
    for stmt in &stmts {
        if let Stmt::Decl { name, kind, .. } = stmt {
            let id = b
                .add(&name.text, *kind)
                .map_err(|e| ParseError::new(name.line, name.col, e.to_string()))?;
            declared.insert(name.text.clone(), (id, name.line, name.col));
        }
    }
    let resolve = |t: &Tok, declared: &BTreeMap<String, (NetId, usize, usize)>| {
        declared
            .get(&t.text)
            .map(|&(id, _, _)| id)
            .ok_or_else(|| ParseError::new(t.line, t.col, format!("undeclared net `{}`", t.text)))
    };
    for stmt in &stmts {
        match stmt {
            Stmt::Decl { name, ops, .. } => {
                if ops.is_empty() {
                    continue;
                }
                let ids = ops.iter().map(|t| resolve(t, &declared)).collect::<Result<Vec<_>, _>>()?;
                let (id, line, col) = declared[&name.text];
                b.set_ops(id, ids)
                    .map_err(|e| ParseError::new(line, col, e.to_string()))?;
            }
            Stmt::Output(name) => {
                let id = resolve(name, &declared)?;
                b.output(id);
            }
        }
    }
    if let Some(states) = fsm {
        let mut sched = FsmSchedule { states: Vec::new() };
        for st in states {
            let mut state = FsmState {
                name: st.name,
                active: Vec::new(),
                reg_writes: Vec::new(),
                mux_bindings: BTreeMap::new(),
            };
            for t in &st.active {
                state.active.push(resolve(t, &declared)?);
            }
            for t in &st.regwrite {
                state.reg_writes.push(resolve(t, &declared)?);
            }
            for (t, v) in &st.mux {
                state.mux_bindings.insert(resolve(t, &declared)?, *v);
            }
            sched.states.push(state);
        }
        b.set_fsm(sched);
    }
    b.finish().map_err(|e| circuit_err(e, &declared))
}

// finish() reports semantic errors by net id; point the message at the
// net's declaration site where one exists.
fn circuit_err(e: CircuitError, declared: &BTreeMap<String, (NetId, usize, usize)>) -> ParseError {
    let net = match &e {
        CircuitError::Arity { net, .. }
        | CircuitError::BadOperand { net, .. }
        | CircuitError::Cycle { net }
        | CircuitError::NotAnInput { net }
        | CircuitError::BadOutput { net }
        | CircuitError::FsmBadRole { net, .. }
        | CircuitError::Unscheduled { net }
        | CircuitError::MultiplyScheduled { net }
        | CircuitError::OrderViolation { net, .. } => Some(*net),
        CircuitError::MissingBinding { mux, .. } => Some(*mux),
        CircuitError::RegReadBeforeWrite { reg, .. } => Some(*reg),
        _ => None,
    };
    let pos = net.and_then(|raw| {
        declared.values().find(|(id, _, _)| id.raw() == raw).map(|&(_, l, c)| (l, c))
    });
    let msg = match net.and_then(|raw| {
        declared.iter().find(|(_, (id, _, _))| id.raw() == raw).map(|(n, _)| n.clone())
    }) {
        Some(name) => format!("net `{name}`: {e}"),
        None => e.to_string(),
    };
    let (line, col) = pos.unwrap_or((1, 1));
    ParseError::new(line, col, msg)
}

fn parse_fsm_block(cur: &mut Cursor) -> Result<Vec<FsmStmt>, ParseError> {
    cur.expect("{")?;
    let mut states = Vec::new();
    loop {
        match cur.next() {
            Some(t) if t.text == "}" => break,
            Some(t) if t.text == "state" => {
                let name = cur.expect_word("state name")?;
                cur.expect("{")?;
                let mut st = FsmStmt {
                    name: name.text,
                    active: Vec::new(),
                    regwrite: Vec::new(),
                    mux: Vec::new(),
                };
                loop {
                    match cur.next() {
                        Some(t) if t.text == "}" => break,
                        Some(t) if t.text == "active" || t.text == "regwrite" => {
                            cur.expect(":")?;
                            let list = parse_id_list(cur)?;
                            if t.text == "active" {
                                st.active.extend(list);
                            } else {
                                st.regwrite.extend(list);
                            }
                        }
                        Some(t) if t.text == "mux" => {
                            let id = cur.expect_word("mux net name")?;
                            cur.expect("=")?;
                            let val = cur.expect_word("0 or 1")?;
                            let v = match val.text.as_str() {
                                "0" => false,
                                "1" => true,
                                other => {
                                    return Err(ParseError::new(val.line, val.col, format!("mux binding must be 0 or 1, found `{other}`")))
                                }
                            };
                            cur.expect(";")?;
                            st.mux.push((id, v));
                        }
                        Some(t) => {
                            return Err(ParseError::new(t.line, t.col, format!("expected `active`, `regwrite`, `mux`, or `}}`, found `{}`", t.text)))
                        }
                        None => return Err(cur.eof_err("`}`")),
                    }
                }
                states.push(st);
            }
            Some(t) => return Err(ParseError::new(t.line, t.col, format!("expected `state` or `}}`, found `{}`", t.text))),
            None => return Err(cur.eof_err("`}`")),
        }
    }
    Ok(states)
}

fn parse_id_list(cur: &mut Cursor) -> Result<Vec<Tok>, ParseError> {
    let mut out = Vec::new();
    loop {
        match cur.next() {
            Some(t) if t.text == ";" => break,
            Some(t) if t.text == "," => continue,
            Some(t) if !is_punct(&t.text) => out.push(t),
            Some(t) => return Err(ParseError::new(t.line, t.col, format!("expected net name, `,`, or `;`, found `{}`", t.text))),
            None => return Err(cur.eof_err("`;`")),
        }
    }
    Ok(out)
}

/// Canonical text form; `parse_netlist` inverts it exactly.
pub fn dump_netlist(c: &Circuit) -> String {
    let mut out = String::new();
    for (id, node) in c.nodes() {
        match node.kind {
            GateKind::Input => {
                let _ = writeln!(out, "input {} ;", c.name(id));
            }
            GateKind::Reg => {
                let _ = writeln!(out, "reg {} = REG {} ;", c.name(id), c.name(node.ops[0]));
            }
            kind => {
                let _ = write!(out, "wire {} = {}", c.name(id), kind.name());
                for &op in &node.ops {
                    let _ = write!(out, " {}", c.name(op));
                }
                let _ = writeln!(out, " ;");
            }
        }
    }
    for &o in c.outputs() {
        let _ = writeln!(out, "output {} ;", c.name(o));
    }
    if let Some(fsm) = c.fsm() {
        let _ = writeln!(out, "fsm {{");
        for st in &fsm.states {
            let _ = writeln!(out, "  state {} {{", st.name);
            if !st.active.is_empty() {
                let names: Vec<&str> = st.active.iter().map(|&n| c.name(n)).collect();
                let _ = writeln!(out, "    active: {} ;", names.join(", "));
            }
            if !st.reg_writes.is_empty() {
                let names: Vec<&str> = st.reg_writes.iter().map(|&n| c.name(n)).collect();
                let _ = writeln!(out, "    regwrite: {} ;", names.join(", "));
            }
            for (&m, &v) in &st.mux_bindings {
                let _ = writeln!(out, "    mux {} = {} ;", c.name(m), v as u8);
            }
            let _ = writeln!(out, "  }}");
        }
        let _ = writeln!(out, "}}");
    }
    out
}

/// Parse a label file against a circuit. Every primary input must be
/// covered exactly once. A share family with a hole below its highest
/// index is read as a restriction of a wider design (the missing shares
/// live outside this circuit), matching what `dump_labels` emits for
/// extracted sub-designs.
pub fn parse_labels(src: &str, c: &Circuit) -> Result<Labeling, ParseError> {
    let mut l = Labeling::new();
    let mut seen: BTreeMap<NetId, usize> = BTreeMap::new();
    for (ln, raw) in src.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let ln = ln + 1;
        let (net_part, role_part) = line.split_once(':').ok_or_else(|| {
            ParseError::new(ln, 1, "expected `<net>: share <k> of <secret>` | `<net>: mask` | `<net>: public`")
        })?;
        let net_name = net_part.trim();
        let net = c
            .net(net_name)
            .ok_or_else(|| ParseError::new(ln, 1, format!("unknown net `{net_name}`")))?;
        if let Some(prev) = seen.insert(net, ln) {
            return Err(ParseError::new(ln, 1, format!("net `{net_name}` already labeled on line {prev}")));
        }
        let words: Vec<&str> = role_part.split_whitespace().collect();
        let role = match words.as_slice() {
            ["mask"] => Role::Mask,
            ["public"] => Role::Public,
            ["share", k, "of", secret] => {
                let index: u32 = k.parse().map_err(|_| {
                    ParseError::new(ln, 1, format!("share index `{k}` is not a number"))
                })?;
                let sid = l.secret_id(secret);
                Role::Share { secret: sid, index }
            }
            _ => {
                return Err(ParseError::new(ln, 1, format!("unrecognized role `{}`", role_part.trim())))
            }
        };
        l.assign(net, role);
    }
    let mut families: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for (_, role) in l.roles() {
        if let Role::Share { secret, index } = role {
            families.entry(*secret).or_default().insert(*index);
        }
    }
    for (secret, indices) in families {
        let max = *indices.iter().next_back().unwrap();
        if indices.len() < max as usize {
            l.declare_shares(secret, max);
        }
    }
    l.check(c).map_err(|e| label_err(e, c))?;
    Ok(l)
}

fn label_err(e: LabelError, c: &Circuit) -> ParseError {
    let msg = match &e {
        LabelError::MissingRole { net } | LabelError::NotAnInput { net } => {
            let name = NetId::from_raw(*net);
            if name.index() < c.len() {
                format!("net `{}`: {e}", c.name(name))
            } else {
                e.to_string()
            }
        }
        _ => e.to_string(),
    };
    ParseError::new(1, 1, msg)
}

/// Canonical label file, one line per primary input in input order.
pub fn dump_labels(l: &Labeling, c: &Circuit) -> String {
    let mut out = String::new();
    for &net in c.inputs() {
        let line = match l.role(net) {
            Some(Role::Share { secret, index }) => {
                let name = l.secret_name(secret).unwrap_or("?");
                format!("{}: share {} of {}", c.name(net), index, name)
            }
            Some(Role::Mask) => format!("{}: mask", c.name(net)),
            Some(Role::Public) => format!("{}: public", c.name(net)),
            None => continue,
        };
        let _ = writeln!(out, "{line}");
    }
    out
}
