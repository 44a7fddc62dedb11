//! Structural validation. Produces a list of diagnostics; an empty list
//! means the program satisfies every invariant the later passes rely on.

use super::ast::*;
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    NoMain,
    DuplicateName,
    CyclicInstantiation,
    UnknownComponent,
    UnknownCell,
    UnknownPort,
    UnknownGroup,
    WidthMismatch,
    BadPrimitiveParams,
    BadGroupDone,
    BadGuard,
    BadControl,
    DuplicateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub component: String,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} in `{}` at {}: {}",
            self.kind, self.component, self.span, self.message
        )
    }
}

/// Maximum signal width the simulator represents.
pub const MAX_WIDTH: u64 = 64;

pub fn validate(program: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut comp_names = HashSet::new();
    for comp in &program.components {
        if !comp_names.insert(comp.name.clone()) {
            diags.push(Diagnostic {
                kind: DiagnosticKind::DuplicateName,
                component: comp.name.clone(),
                span: comp.span,
                message: format!("duplicate component `{}`", comp.name),
            });
        }
    }
    let mains = program.components.iter().filter(|c| c.name == Program::ENTRY).count();
    if mains != 1 {
        diags.push(Diagnostic {
            kind: DiagnosticKind::NoMain,
            component: Program::ENTRY.into(),
            span: Span::default(),
            message: format!("expected exactly one `main` component, found {mains}"),
        });
    }

    check_instantiation_cycles(program, &mut diags);
    for comp in &program.components {
        validate_component(program, comp, &mut diags);
    }
    diags
}

fn check_instantiation_cycles(program: &Program, diags: &mut Vec<Diagnostic>) {
    // DFS over the instantiates-relation.
    fn visit(
        program: &Program,
        name: &str,
        visiting: &mut Vec<String>,
        done: &mut HashSet<String>,
        diags: &mut Vec<Diagnostic>,
    ) {
        if done.contains(name) {
            return;
        }
        if visiting.iter().any(|n| n == name) {
            diags.push(Diagnostic {
                kind: DiagnosticKind::CyclicInstantiation,
                component: name.into(),
                span: Span::default(),
                message: format!(
                    "cyclic component instantiation: {} -> {}",
                    visiting.join(" -> "),
                    name
                ),
            });
            return;
        }
        let Some(comp) = program.component(name) else { return };
        visiting.push(name.into());
        for cell in &comp.cells {
            if let CellProto::Component(child) = &cell.proto {
                visit(program, child, visiting, done, diags);
            }
        }
        visiting.pop();
        done.insert(name.into());
    }
    let mut done = HashSet::new();
    for comp in &program.components {
        visit(program, &comp.name, &mut Vec::new(), &mut done, diags);
    }
}

struct Ctx<'a> {
    program: &'a Program,
    comp: &'a Component,
}

impl<'a> Ctx<'a> {
    fn diag(&self, kind: DiagnosticKind, span: Span, message: String) -> Diagnostic {
        Diagnostic { kind, component: self.comp.name.clone(), span, message }
    }

    /// Width of a port reference, or None (already diagnosed) if unresolvable.
    fn port_width(&self, port: &PortRef, span: Span, diags: &mut Vec<Diagnostic>) -> Option<u64> {
        match port {
            PortRef::Hole { group, .. } => {
                if self.comp.group(group).is_none() {
                    diags.push(self.diag(
                        DiagnosticKind::UnknownGroup,
                        span,
                        format!("unknown group `{group}` in hole reference"),
                    ));
                    return None;
                }
                Some(1)
            }
            PortRef::This { port } => match self.comp.self_port_width(port) {
                Some(w) => Some(w),
                None => {
                    diags.push(self.diag(
                        DiagnosticKind::UnknownPort,
                        span,
                        format!("component `{}` has no port `{port}`", self.comp.name),
                    ));
                    None
                }
            },
            PortRef::Cell { cell, port } => {
                let Some(c) = self.comp.cell(cell) else {
                    diags.push(self.diag(
                        DiagnosticKind::UnknownCell,
                        span,
                        format!("unknown cell `{cell}`"),
                    ));
                    return None;
                };
                let width = match &c.proto {
                    CellProto::Primitive(kind) => kind.port_width(port),
                    CellProto::Component(name) => self
                        .program
                        .component(name)
                        .and_then(|comp| comp.self_port_width(port)),
                };
                if width.is_none() {
                    diags.push(self.diag(
                        DiagnosticKind::UnknownPort,
                        span,
                        format!("cell `{cell}` has no port `{port}`"),
                    ));
                }
                width
            }
        }
    }

    fn atom_width(&self, atom: &Atom, span: Span, diags: &mut Vec<Diagnostic>) -> Option<u64> {
        match atom {
            Atom::Port(p) => self.port_width(p, span, diags),
            Atom::Lit(l) => {
                if l.width == 0 || l.width > MAX_WIDTH {
                    diags.push(self.diag(
                        DiagnosticKind::BadPrimitiveParams,
                        span,
                        format!("literal width {} out of range 1..={MAX_WIDTH}", l.width),
                    ));
                    return None;
                }
                if l.width < 64 && l.value >= (1u64 << l.width) {
                    diags.push(self.diag(
                        DiagnosticKind::WidthMismatch,
                        span,
                        format!("literal value {} does not fit width {}", l.value, l.width),
                    ));
                }
                Some(l.width)
            }
        }
    }

    fn check_guard(&self, guard: &Guard, span: Span, diags: &mut Vec<Diagnostic>) {
        match guard {
            Guard::True => {}
            Guard::Atom(a) => {
                if let Some(w) = self.atom_width(a, span, diags) {
                    if w != 1 {
                        diags.push(self.diag(
                            DiagnosticKind::BadGuard,
                            span,
                            format!("guard operand `{a}` is {w} bits wide, expected 1"),
                        ));
                    }
                }
            }
            Guard::Not(g) => self.check_guard(g, span, diags),
            Guard::And(a, b) | Guard::Or(a, b) => {
                self.check_guard(a, span, diags);
                self.check_guard(b, span, diags);
            }
            Guard::Eq(a, b) | Guard::Neq(a, b) => {
                let wa = self.atom_width(a, span, diags);
                let wb = self.atom_width(b, span, diags);
                if let (Some(wa), Some(wb)) = (wa, wb) {
                    if wa != wb {
                        diags.push(self.diag(
                            DiagnosticKind::WidthMismatch,
                            span,
                            format!("comparison operands `{a}` ({wa} bits) and `{b}` ({wb} bits) differ"),
                        ));
                    }
                }
            }
        }
    }

    fn check_assignment(&self, asgn: &Assignment, diags: &mut Vec<Diagnostic>) {
        let dw = self.port_width(&asgn.dst, asgn.span, diags);
        let sw = self.atom_width(&asgn.src, asgn.span, diags);
        if let (Some(dw), Some(sw)) = (dw, sw) {
            if dw != sw {
                diags.push(self.diag(
                    DiagnosticKind::WidthMismatch,
                    asgn.span,
                    format!(
                        "assignment `{}` drives {dw}-bit `{}` from {sw}-bit `{}`",
                        super::print::format_assignment(asgn),
                        asgn.dst,
                        asgn.src
                    ),
                ));
            }
        }
        self.check_guard(&asgn.guard, asgn.span, diags);
    }
}

fn validate_component(program: &Program, comp: &Component, diags: &mut Vec<Diagnostic>) {
    let ctx = Ctx { program, comp };

    // Cells and groups share a namespace: both become scopes in traces.
    let mut names = HashSet::new();
    for cell in &comp.cells {
        if !names.insert(cell.name.clone()) {
            diags.push(ctx.diag(
                DiagnosticKind::DuplicateName,
                cell.span,
                format!("duplicate cell name `{}`", cell.name),
            ));
        }
        if let CellProto::Component(name) = &cell.proto {
            if program.component(name).is_none() {
                diags.push(ctx.diag(
                    DiagnosticKind::UnknownComponent,
                    cell.span,
                    format!("cell `{}` instantiates unknown component `{name}`", cell.name),
                ));
            }
        }
        if let CellProto::Primitive(kind) = &cell.proto {
            check_primitive_params(&ctx, cell, kind, diags);
        }
    }
    for group in &comp.groups {
        if !names.insert(group.name.clone()) {
            diags.push(ctx.diag(
                DiagnosticKind::DuplicateName,
                group.span,
                format!("duplicate group/cell name `{}`", group.name),
            ));
        }
    }
    let mut port_names = HashSet::new();
    for port in comp.inputs.iter().chain(comp.outputs.iter()) {
        if port.name == "go" || port.name == "done" || !port_names.insert(port.name.clone()) {
            diags.push(ctx.diag(
                DiagnosticKind::DuplicateName,
                comp.span,
                format!("duplicate port name `{}`", port.name),
            ));
        }
    }

    for group in &comp.groups {
        let done_count = group
            .assignments
            .iter()
            .filter(|a| matches!(&a.dst, PortRef::Hole { group: g, hole: Hole::Done } if *g == group.name))
            .count();
        match group.kind {
            GroupKind::Dynamic => {
                if done_count != 1 {
                    diags.push(ctx.diag(
                        DiagnosticKind::BadGroupDone,
                        group.span,
                        format!(
                            "dynamic group `{}` must have exactly one done condition, found {done_count}",
                            group.name
                        ),
                    ));
                }
            }
            GroupKind::Combinational | GroupKind::Static { .. } => {
                if done_count != 0 {
                    diags.push(ctx.diag(
                        DiagnosticKind::BadGroupDone,
                        group.span,
                        format!("group `{}` cannot have a done condition", group.name),
                    ));
                }
            }
        }
        if let GroupKind::Static { latency } = group.kind {
            if latency == 0 {
                diags.push(ctx.diag(
                    DiagnosticKind::BadPrimitiveParams,
                    group.span,
                    format!("static group `{}` must have latency >= 1", group.name),
                ));
            }
        }
        for asgn in &group.assignments {
            ctx.check_assignment(asgn, diags);
        }
    }
    for asgn in &comp.continuous {
        ctx.check_assignment(asgn, diags);
    }

    validate_control(&ctx, &comp.control, diags);

    // @id values unique per component once assigned.
    let mut ids = HashMap::new();
    collect_ids(&comp.control, &mut ids);
    for (id, count) in ids {
        if count > 1 {
            diags.push(ctx.diag(
                DiagnosticKind::DuplicateId,
                Span::default(),
                format!("@id({id}) assigned to {count} control blocks"),
            ));
        }
    }
}

fn collect_ids(ctrl: &Control, ids: &mut HashMap<u64, usize>) {
    if let Some(id) = ctrl.attributes().num(attrs::ID) {
        *ids.entry(id).or_insert(0) += 1;
    }
    match ctrl {
        Control::Seq { children, .. }
        | Control::Par { children, .. }
        | Control::StaticSeq { children, .. }
        | Control::StaticPar { children, .. } => {
            for c in children {
                collect_ids(c, ids);
            }
        }
        Control::If { then, els, .. } => {
            collect_ids(then, ids);
            collect_ids(els, ids);
        }
        Control::While { body, .. } => collect_ids(body, ids),
        Control::Empty { .. } | Control::Enable { .. } => {}
    }
}

fn check_primitive_params(
    ctx: &Ctx,
    cell: &Cell,
    kind: &PrimitiveKind,
    diags: &mut Vec<Diagnostic>,
) {
    let mut bad = |msg: String| {
        diags.push(ctx.diag(DiagnosticKind::BadPrimitiveParams, cell.span, msg));
    };
    let check_width = |w: u64, bad: &mut dyn FnMut(String)| {
        if w == 0 || w > MAX_WIDTH {
            bad(format!("cell `{}`: width {w} out of range 1..={MAX_WIDTH}", cell.name));
        }
    };
    match *kind {
        PrimitiveKind::Register { width }
        | PrimitiveKind::Adder { width }
        | PrimitiveKind::Subtractor { width }
        | PrimitiveKind::Eq { width }
        | PrimitiveKind::Lt { width }
        | PrimitiveKind::Wire { width } => check_width(width, &mut bad),
        PrimitiveKind::CombMemD1 { width, size, idx_width } => {
            check_width(width, &mut bad);
            check_width(idx_width, &mut bad);
            if size == 0 {
                bad(format!("cell `{}`: memory size must be >= 1", cell.name));
            } else if idx_width < 64 && size > (1u64 << idx_width) {
                bad(format!(
                    "cell `{}`: {size} entries not addressable with {idx_width}-bit index",
                    cell.name
                ));
            }
        }
        PrimitiveKind::SeqMult { width, latency } => {
            check_width(width, &mut bad);
            if latency == 0 {
                bad(format!("cell `{}`: seq_mult latency must be >= 1", cell.name));
            }
        }
        PrimitiveKind::Constant { width, value } => {
            check_width(width, &mut bad);
            if width < 64 && value >= (1u64 << width) {
                bad(format!("cell `{}`: constant {value} does not fit width {width}", cell.name));
            }
        }
    }
}

fn validate_control(ctx: &Ctx, ctrl: &Control, diags: &mut Vec<Diagnostic>) {
    match ctrl {
        Control::Empty { .. } => {}
        Control::Enable { group, span, .. } => match ctx.comp.group(group) {
            None => diags.push(ctx.diag(
                DiagnosticKind::UnknownGroup,
                *span,
                format!("control enables undeclared group `{group}`"),
            )),
            Some(g) if g.kind == GroupKind::Combinational => diags.push(ctx.diag(
                DiagnosticKind::BadControl,
                *span,
                format!("combinational group `{group}` cannot be enabled directly"),
            )),
            Some(_) => {}
        },
        Control::Seq { children, .. } | Control::Par { children, .. } => {
            for c in children {
                validate_control(ctx, c, diags);
            }
        }
        Control::StaticSeq { children, .. } | Control::StaticPar { children, .. } => {
            for c in children {
                validate_control(ctx, c, diags);
            }
        }
        Control::If { cond, with, then, els, .. } => {
            check_cond(ctx, cond, with, diags);
            validate_control(ctx, then, diags);
            validate_control(ctx, els, diags);
        }
        Control::While { cond, with, body, .. } => {
            check_cond(ctx, cond, with, diags);
            validate_control(ctx, body, diags);
        }
    }
}

fn check_cond(ctx: &Ctx, cond: &PortRef, with: &Option<String>, diags: &mut Vec<Diagnostic>) {
    if let Some(w) = ctx.port_width(cond, Span::default(), diags) {
        if w != 1 {
            diags.push(ctx.diag(
                DiagnosticKind::BadControl,
                Span::default(),
                format!("condition port `{cond}` is {w} bits wide, expected 1"),
            ));
        }
    }
    if let Some(name) = with {
        match ctx.comp.group(name) {
            None => diags.push(ctx.diag(
                DiagnosticKind::UnknownGroup,
                Span::default(),
                format!("`with` references undeclared group `{name}`"),
            )),
            Some(g) if g.kind != GroupKind::Combinational => diags.push(ctx.diag(
                DiagnosticKind::BadControl,
                Span::default(),
                format!("`with` group `{name}` must be combinational"),
            )),
            Some(_) => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse;
    use super::*;

    #[test]
    fn width_mismatch_detected() {
        let src = r#"
component main() -> () {
  cells { r = std_reg(1); big = std_reg(32); }
  wires {
    group g { r.in = big.out; r.write_en = 1'd1; g[done] = r.done; }
  }
  control { g; }
}
"#;
        let diags = validate(&parse(src).unwrap());
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::WidthMismatch), "{diags:?}");
    }

    #[test]
    fn unknown_group_in_control() {
        let src = "component main()->(){cells{}wires{}control{ghost;}}";
        let diags = validate(&parse(src).unwrap());
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::UnknownGroup), "{diags:?}");
    }

    #[test]
    fn missing_done_detected() {
        let src = r#"
component main() -> () {
  cells { r = std_reg(8); }
  wires { group g { r.in = 8'd1; r.write_en = 1'd1; } }
  control { g; }
}
"#;
        let diags = validate(&parse(src).unwrap());
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::BadGroupDone), "{diags:?}");
    }

    #[test]
    fn two_mains_rejected() {
        let src = "component main()->(){cells{}wires{}control{}}\
                   component main()->(){cells{}wires{}control{}}";
        let diags = validate(&parse(src).unwrap());
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::DuplicateName));
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::NoMain));
    }

    #[test]
    fn instantiation_cycle_rejected() {
        let src = r#"
component main() -> () { cells { a = alpha(); } wires {} control {} }
component alpha() -> () { cells { b = beta(); } wires {} control {} }
component beta() -> () { cells { a = alpha(); } wires {} control {} }
"#;
        let diags = validate(&parse(src).unwrap());
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::CyclicInstantiation), "{diags:?}");
    }
}
