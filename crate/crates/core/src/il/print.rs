//! Deterministic pretty-printer. `parse(print(p))` is structurally `p`.

use super::ast::*;
use std::fmt::Write;

pub fn print(program: &Program) -> String {
    let mut out = String::new();
    for (i, comp) in program.components.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_component(&mut out, comp);
    }
    out
}

fn print_component(out: &mut String, comp: &Component) {
    let ports = |ps: &[Port]| {
        ps.iter().map(|p| format!("{}: {}", p.name, p.width)).collect::<Vec<_>>().join(", ")
    };
    let _ = writeln!(
        out,
        "component {}({}) -> ({}) {{",
        comp.name,
        ports(&comp.inputs),
        ports(&comp.outputs)
    );

    let _ = writeln!(out, "  cells {{");
    for cell in &comp.cells {
        let _ = write!(out, "    {}", attrs_prefix(&cell.attributes));
        match &cell.proto {
            CellProto::Primitive(kind) => {
                let params =
                    kind.params().iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
                let _ = writeln!(out, "{} = {}({});", cell.name, kind.text_name(), params);
            }
            CellProto::Component(name) => {
                let _ = writeln!(out, "{} = {}();", cell.name, name);
            }
        }
    }
    let _ = writeln!(out, "  }}");

    let _ = writeln!(out, "  wires {{");
    for group in &comp.groups {
        let head = match group.kind {
            GroupKind::Dynamic => "group".to_string(),
            GroupKind::Combinational => "comb group".to_string(),
            GroupKind::Static { latency } => format!("static<{latency}> group"),
        };
        let _ = writeln!(out, "    {}{} {} {{", attrs_prefix(&group.attributes), head, group.name);
        for asgn in &group.assignments {
            let _ = writeln!(out, "      {}", format_assignment(asgn));
        }
        let _ = writeln!(out, "    }}");
    }
    for asgn in &comp.continuous {
        let _ = writeln!(out, "    {}", format_assignment(asgn));
    }
    let _ = writeln!(out, "  }}");

    let _ = writeln!(out, "  control {{");
    match &comp.control {
        // A bare empty control prints as `control {}`; an attributed one
        // keeps its metadata via the explicit `empty;` statement.
        Control::Empty { attributes } if attributes.is_empty() => {}
        ctrl => print_control(out, ctrl, 2),
    }
    let _ = writeln!(out, "  }}");
    let _ = writeln!(out, "}}");
}

fn attrs_prefix(attrs: &Attributes) -> String {
    let mut s = String::new();
    for a in &attrs.0 {
        match a.value {
            Some(v) => {
                let _ = write!(s, "@{}({}) ", a.key, v);
            }
            None => {
                let _ = write!(s, "@{} ", a.key);
            }
        }
    }
    s
}

pub fn format_assignment(asgn: &Assignment) -> String {
    if asgn.guard.is_true() {
        format!("{} = {};", asgn.dst, asgn.src)
    } else {
        format!("{} = {} ? {};", asgn.dst, format_guard(&asgn.guard), asgn.src)
    }
}

/// Guard text with minimal parentheses (`|` < `&` < `!`).
pub fn format_guard(guard: &Guard) -> String {
    fn go(g: &Guard, parent_prec: u8, out: &mut String) {
        let prec = match g {
            Guard::Or(..) => 1,
            Guard::And(..) => 2,
            Guard::Not(..) => 3,
            _ => 4,
        };
        let need_paren = prec < parent_prec;
        if need_paren {
            out.push('(');
        }
        match g {
            Guard::True => out.push_str("1'd1"),
            Guard::Atom(a) => {
                let _ = write!(out, "{a}");
            }
            Guard::Not(inner) => {
                out.push('!');
                go(inner, 3, out);
            }
            Guard::And(a, b) => {
                go(a, 2, out);
                out.push_str(" & ");
                go(b, 2, out);
            }
            Guard::Or(a, b) => {
                go(a, 1, out);
                out.push_str(" | ");
                go(b, 1, out);
            }
            Guard::Eq(a, b) => {
                let _ = write!(out, "{a} == {b}");
            }
            Guard::Neq(a, b) => {
                let _ = write!(out, "{a} != {b}");
            }
        }
        if need_paren {
            out.push(')');
        }
    }
    let mut s = String::new();
    go(guard, 0, &mut s);
    s
}

fn print_control(out: &mut String, ctrl: &Control, depth: usize) {
    let pad = "  ".repeat(depth);
    let attrs = attrs_prefix(ctrl.attributes());
    match ctrl {
        Control::Empty { .. } => {
            let _ = writeln!(out, "{pad}{attrs}empty;");
        }
        Control::Enable { group, .. } => {
            let _ = writeln!(out, "{pad}{attrs}{group};");
        }
        Control::Seq { children, .. } => {
            let _ = writeln!(out, "{pad}{attrs}seq {{");
            for c in children {
                print_control(out, c, depth + 1);
            }
            let _ = writeln!(out, "{pad}}}");
        }
        Control::Par { children, .. } => {
            let _ = writeln!(out, "{pad}{attrs}par {{");
            for c in children {
                print_control(out, c, depth + 1);
            }
            let _ = writeln!(out, "{pad}}}");
        }
        Control::StaticSeq { latency, children, .. } => {
            let _ = writeln!(out, "{pad}{attrs}static<{latency}> seq {{");
            for c in children {
                print_control(out, c, depth + 1);
            }
            let _ = writeln!(out, "{pad}}}");
        }
        Control::StaticPar { latency, children, .. } => {
            let _ = writeln!(out, "{pad}{attrs}static<{latency}> par {{");
            for c in children {
                print_control(out, c, depth + 1);
            }
            let _ = writeln!(out, "{pad}}}");
        }
        Control::If { cond, with, then, els, .. } => {
            let with_txt =
                with.as_ref().map(|w| format!(" with {w}")).unwrap_or_default();
            let _ = writeln!(out, "{pad}{attrs}if {cond}{with_txt} {{");
            print_control_body(out, then, depth + 1);
            if els.is_empty() {
                let _ = writeln!(out, "{pad}}}");
            } else {
                let _ = writeln!(out, "{pad}}} else {{");
                print_control_body(out, els, depth + 1);
                let _ = writeln!(out, "{pad}}}");
            }
        }
        Control::While { cond, with, body, .. } => {
            let with_txt =
                with.as_ref().map(|w| format!(" with {w}")).unwrap_or_default();
            let _ = writeln!(out, "{pad}{attrs}while {cond}{with_txt} {{");
            print_control_body(out, body, depth + 1);
            let _ = writeln!(out, "{pad}}}");
        }
    }
}

/// Bodies of if/while parse as implicit blocks, so an un-attributed Seq
/// child would not round-trip; print its children directly only when that
/// is unambiguous (attributed nodes keep their wrapper).
fn print_control_body(out: &mut String, ctrl: &Control, depth: usize) {
    match ctrl {
        Control::Empty { .. } if ctrl.attributes().is_empty() => {}
        _ => print_control(out, ctrl, depth),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse;
    use super::*;

    #[test]
    fn empty_main_canonical() {
        let p = parse("component main()->(){cells{}wires{}control{}}").unwrap();
        let text = print(&p);
        assert_eq!(
            text,
            "component main() -> () {\n  cells {\n  }\n  wires {\n  }\n  control {\n  }\n}\n"
        );
        assert_eq!(parse(&text).unwrap(), p);
    }

    #[test]
    fn done_hole_text() {
        let src = r#"
component main() -> () {
  cells { r = std_reg(32); mem = comb_mem_d1(32, 1, 1); }
  wires {
    group read {
      mem.addr0 = 1'd0;
      r.in = mem.read_data;
      r.write_en = 1'd1;
      read[done] = r.done;
    }
  }
  control { read; }
}
"#;
        let p = parse(src).unwrap();
        let text = print(&p);
        assert!(text.contains("read[done] = r.done;"), "{text}");
        assert_eq!(parse(&text).unwrap(), p);
    }

    #[test]
    fn guard_parenthesization_round_trips() {
        let g = Guard::port(PortRef::This { port: "go" })
            .or(Guard::port(PortRef::This { port: "done" }).not())
            .and(Guard::Eq(
                Atom::Port(PortRef::Cell { cell: "f".into(), port: "out".into() }),
                Atom::Lit(Literal { width: 2, value: 1 }),
            ));
        let text = format_guard(&g);
        assert_eq!(text, "(go | !done) & f.out == 2'd1");
    }
}
