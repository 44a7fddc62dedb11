//! AST for the accelerator intermediate language.
//!
//! A [`Program`] is a list of components; each component has `cells`,
//! `wires` (continuous assignments plus named groups), and a `control`
//! schedule. Execution starts at the `main` component.

use std::fmt;

/// Source position. Retained for diagnostics only; two spans always compare
/// equal so that structural equality of ASTs ignores formatting.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}
impl Eq for Span {}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Attribute attached to a cell, group, or control block, e.g. `@external`,
/// `@protected`, `@promotable(4)`, `@id(7)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub key: String,
    pub value: Option<u64>,
}

impl Attribute {
    pub fn flag(key: &str) -> Self {
        Attribute { key: key.into(), value: None }
    }
    pub fn num(key: &str, value: u64) -> Self {
        Attribute { key: key.into(), value: Some(value) }
    }
}

/// Ordered attribute set. Lookup by key; duplicates rejected at parse time.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Attributes(pub Vec<Attribute>);

impl Attributes {
    pub fn get(&self, key: &str) -> Option<&Attribute> {
        self.0.iter().find(|a| a.key == key)
    }
    pub fn has(&self, key: &str) -> bool {
        self.get(key).is_some()
    }
    pub fn num(&self, key: &str) -> Option<u64> {
        self.get(key).and_then(|a| a.value)
    }
    pub fn set(&mut self, attr: Attribute) {
        self.0.retain(|a| a.key != attr.key);
        self.0.push(attr);
    }
    pub fn remove(&mut self, key: &str) {
        self.0.retain(|a| a.key != key);
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Well-known attribute keys.
pub mod attrs {
    pub const EXTERNAL: &str = "external";
    pub const PROTECTED: &str = "protected";
    pub const PROMOTABLE: &str = "promotable";
    pub const ID: &str = "id";
}

/// Primitive library. The library is intentionally small: registers,
/// a one-dimensional combinational-read memory, basic combinational
/// arithmetic/comparison, a multi-cycle multiplier, constants, and the
/// 1-bit wires used for instrumentation probes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimitiveKind {
    Register { width: u64 },
    CombMemD1 { width: u64, size: u64, idx_width: u64 },
    Adder { width: u64 },
    Subtractor { width: u64 },
    Eq { width: u64 },
    Lt { width: u64 },
    SeqMult { width: u64, latency: u64 },
    Constant { width: u64, value: u64 },
    Wire { width: u64 },
}

impl PrimitiveKind {
    pub fn text_name(&self) -> &'static str {
        match self {
            PrimitiveKind::Register { .. } => "std_reg",
            PrimitiveKind::CombMemD1 { .. } => "comb_mem_d1",
            PrimitiveKind::Adder { .. } => "std_add",
            PrimitiveKind::Subtractor { .. } => "std_sub",
            PrimitiveKind::Eq { .. } => "std_eq",
            PrimitiveKind::Lt { .. } => "std_lt",
            PrimitiveKind::SeqMult { .. } => "seq_mult",
            PrimitiveKind::Constant { .. } => "std_const",
            PrimitiveKind::Wire { .. } => "std_wire",
        }
    }

    pub fn params(&self) -> Vec<u64> {
        match *self {
            PrimitiveKind::Register { width } => vec![width],
            PrimitiveKind::CombMemD1 { width, size, idx_width } => {
                vec![width, size, idx_width]
            }
            PrimitiveKind::Adder { width }
            | PrimitiveKind::Subtractor { width }
            | PrimitiveKind::Eq { width }
            | PrimitiveKind::Lt { width }
            | PrimitiveKind::Wire { width } => vec![width],
            PrimitiveKind::SeqMult { width, latency } => vec![width, latency],
            PrimitiveKind::Constant { width, value } => vec![width, value],
        }
    }

    /// Ports as (name, width, is_output).
    pub fn ports(&self) -> Vec<(&'static str, u64, bool)> {
        match *self {
            PrimitiveKind::Register { width } => vec![
                ("in", width, false),
                ("write_en", 1, false),
                ("out", width, true),
                ("done", 1, true),
            ],
            PrimitiveKind::CombMemD1 { width, idx_width, .. } => vec![
                ("addr0", idx_width, false),
                ("write_data", width, false),
                ("write_en", 1, false),
                ("read_data", width, true),
                ("done", 1, true),
            ],
            PrimitiveKind::Adder { width }
            | PrimitiveKind::Subtractor { width } => vec![
                ("left", width, false),
                ("right", width, false),
                ("out", width, true),
            ],
            PrimitiveKind::Eq { width } | PrimitiveKind::Lt { width } => vec![
                ("left", width, false),
                ("right", width, false),
                ("out", 1, true),
            ],
            PrimitiveKind::SeqMult { width, .. } => vec![
                ("left", width, false),
                ("right", width, false),
                ("go", 1, false),
                ("out", width, true),
                ("done", 1, true),
            ],
            PrimitiveKind::Constant { width, .. } => vec![("out", width, true)],
            PrimitiveKind::Wire { width } => {
                vec![("in", width, false), ("out", width, true)]
            }
        }
    }

    pub fn port_width(&self, port: &str) -> Option<u64> {
        self.ports().iter().find(|(n, _, _)| *n == port).map(|(_, w, _)| *w)
    }

    /// The port that launches this primitive, if it is sequential.
    /// Assignments to this port inside a group are "calls" and receive
    /// CP probes under instrumentation.
    pub fn go_port(&self) -> Option<&'static str> {
        match self {
            PrimitiveKind::Register { .. } => Some("write_en"),
            PrimitiveKind::CombMemD1 { .. } => Some("write_en"),
            PrimitiveKind::SeqMult { .. } => Some("go"),
            _ => None,
        }
    }

    pub fn is_sequential(&self) -> bool {
        self.go_port().is_some()
    }
}

/// What a cell instantiates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellProto {
    Primitive(PrimitiveKind),
    Component(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub name: String,
    pub proto: CellProto,
    pub attributes: Attributes,
    pub span: Span,
}

/// Destination or source of an assignment, or an operand in a guard.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PortRef {
    /// `cell.port`
    Cell { cell: String, port: String },
    /// `group[go]` / `group[done]` hole.
    Hole { group: String, hole: Hole },
    /// A port of the enclosing component (`go`, `done`, or a declared port).
    This { port: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Hole {
    Go,
    Done,
}

impl Hole {
    pub fn name(self) -> &'static str {
        match self {
            Hole::Go => "go",
            Hole::Done => "done",
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PortRef::Cell { cell, port } => write!(f, "{cell}.{port}"),
            PortRef::Hole { group, hole } => write!(f, "{group}[{}]", hole.name()),
            PortRef::This { port } => write!(f, "{port}"),
        }
    }
}

/// Sized literal `W'dN`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    pub width: u64,
    pub value: u64,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}'d{}", self.width, self.value)
    }
}

/// Source of an assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    Port(PortRef),
    Lit(Literal),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Port(p) => write!(f, "{p}"),
            Atom::Lit(l) => write!(f, "{l}"),
        }
    }
}

/// Guard expression over 1-bit values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    True,
    Atom(Atom),
    Not(Box<Guard>),
    And(Box<Guard>, Box<Guard>),
    Or(Box<Guard>, Box<Guard>),
    Eq(Atom, Atom),
    Neq(Atom, Atom),
}

impl Guard {
    pub fn and(self, other: Guard) -> Guard {
        match (self, other) {
            (Guard::True, g) | (g, Guard::True) => g,
            (a, b) => Guard::And(Box::new(a), Box::new(b)),
        }
    }
    pub fn or(self, other: Guard) -> Guard {
        Guard::Or(Box::new(self), Box::new(other))
    }
    pub fn not(self) -> Guard {
        Guard::Not(Box::new(self))
    }
    pub fn port(p: PortRef) -> Guard {
        Guard::Atom(Atom::Port(p))
    }
    pub fn is_true(&self) -> bool {
        matches!(self, Guard::True)
    }

    /// All port references mentioned by the guard.
    pub fn ports(&self) -> Vec<&PortRef> {
        fn walk<'a>(g: &'a Guard, out: &mut Vec<&'a PortRef>) {
            match g {
                Guard::True => {}
                Guard::Atom(a) => atom(a, out),
                Guard::Not(inner) => walk(inner, out),
                Guard::And(a, b) | Guard::Or(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Guard::Eq(a, b) | Guard::Neq(a, b) => {
                    atom(a, out);
                    atom(b, out);
                }
            }
        }
        fn atom<'a>(a: &'a Atom, out: &mut Vec<&'a PortRef>) {
            if let Atom::Port(p) = a {
                out.push(p);
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub dst: PortRef,
    pub guard: Guard,
    pub src: Atom,
    pub span: Span,
}

/// Group timing discipline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    /// go/done interface; exactly one done assignment.
    Dynamic,
    /// Always-combinational; no done. Used by `with` clauses.
    Combinational,
    /// Fixed latency in cycles; no done.
    Static { latency: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub name: String,
    pub kind: GroupKind,
    pub assignments: Vec<Assignment>,
    pub attributes: Attributes,
    pub span: Span,
}

impl Group {
    /// The assignment driving this group's done hole, if any.
    pub fn done_assignment(&self) -> Option<&Assignment> {
        self.assignments.iter().find(
            |a| matches!(&a.dst, PortRef::Hole { group, hole: Hole::Done } if *group == self.name),
        )
    }
}

/// Control schedule of a component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Control {
    Empty {
        attributes: Attributes,
    },
    Enable {
        group: String,
        attributes: Attributes,
        span: Span,
    },
    Seq {
        children: Vec<Control>,
        attributes: Attributes,
    },
    Par {
        children: Vec<Control>,
        attributes: Attributes,
    },
    If {
        cond: PortRef,
        with: Option<String>,
        then: Box<Control>,
        els: Box<Control>,
        attributes: Attributes,
    },
    While {
        cond: PortRef,
        with: Option<String>,
        body: Box<Control>,
        attributes: Attributes,
    },
    /// Statically scheduled region with a known total latency, produced by
    /// promotion (or written directly as `static seq { .. }` etc.).
    StaticSeq {
        latency: u64,
        children: Vec<Control>,
        attributes: Attributes,
    },
    StaticPar {
        latency: u64,
        children: Vec<Control>,
        attributes: Attributes,
    },
}

impl Control {
    pub fn attributes(&self) -> &Attributes {
        match self {
            Control::Empty { attributes }
            | Control::Enable { attributes, .. }
            | Control::Seq { attributes, .. }
            | Control::Par { attributes, .. }
            | Control::If { attributes, .. }
            | Control::While { attributes, .. }
            | Control::StaticSeq { attributes, .. }
            | Control::StaticPar { attributes, .. } => attributes,
        }
    }

    pub fn attributes_mut(&mut self) -> &mut Attributes {
        match self {
            Control::Empty { attributes }
            | Control::Enable { attributes, .. }
            | Control::Seq { attributes, .. }
            | Control::Par { attributes, .. }
            | Control::If { attributes, .. }
            | Control::While { attributes, .. }
            | Control::StaticSeq { attributes, .. }
            | Control::StaticPar { attributes, .. } => attributes,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Control::Empty { .. })
    }

    /// Node kind label used in control paths and visualizations.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Control::Empty { .. } => "empty",
            Control::Enable { .. } => "enable",
            Control::Seq { .. } => "seq",
            Control::Par { .. } => "par",
            Control::If { .. } => "if",
            Control::While { .. } => "while",
            Control::StaticSeq { .. } => "staticseq",
            Control::StaticPar { .. } => "staticpar",
        }
    }

    pub fn empty() -> Control {
        Control::Empty { attributes: Attributes::default() }
    }

    pub fn enable(group: &str) -> Control {
        Control::Enable {
            group: group.to_string(),
            attributes: Attributes::default(),
            span: Span::default(),
        }
    }

    /// Number of control nodes in this subtree (Empty children of if/else
    /// count only when they are the whole control).
    pub fn count_nodes(&self) -> usize {
        match self {
            Control::Empty { .. } | Control::Enable { .. } => 1,
            Control::Seq { children, .. }
            | Control::Par { children, .. }
            | Control::StaticSeq { children, .. }
            | Control::StaticPar { children, .. } => {
                1 + children.iter().map(Control::count_nodes).sum::<usize>()
            }
            Control::If { then, els, .. } => {
                let mut n = 1 + then.count_nodes();
                if !els.is_empty() {
                    n += els.count_nodes();
                }
                n
            }
            Control::While { body, .. } => 1 + body.count_nodes(),
        }
    }
}

/// Declared component port (beyond the implicit 1-bit go/done pair).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub width: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    pub cells: Vec<Cell>,
    /// Continuous assignments (outside any group).
    pub continuous: Vec<Assignment>,
    pub groups: Vec<Group>,
    pub control: Control,
    pub span: Span,
}

impl Component {
    pub fn cell(&self, name: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.name == name)
    }
    pub fn group(&self, name: &str) -> Option<&Group> {
        self.groups.iter().find(|g| g.name == name)
    }
    pub fn group_mut(&mut self, name: &str) -> Option<&mut Group> {
        self.groups.iter_mut().find(|g| g.name == name)
    }

    /// Width of one of this component's own ports (`go`/`done` are implicit).
    pub fn self_port_width(&self, port: &str) -> Option<u64> {
        if port == "go" || port == "done" {
            return Some(1);
        }
        self.inputs
            .iter()
            .chain(self.outputs.iter())
            .find(|p| p.name == port)
            .map(|p| p.width)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub components: Vec<Component>,
}

impl Program {
    pub const ENTRY: &'static str = "main";

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }
    pub fn component_mut(&mut self, name: &str) -> Option<&mut Component> {
        self.components.iter_mut().find(|c| c.name == name)
    }
    pub fn main(&self) -> Option<&Component> {
        self.component(Self::ENTRY)
    }
}
