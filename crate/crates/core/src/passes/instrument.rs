//! Probe instrumentation.
//!
//! Adds one GA probe per group plus a call probe (CG/CC/CP) for every
//! assignment to a callee's go port inside a group. Probes are 1-bit
//! `std_wire` cells marked `@protected`; their assignments copy the guard
//! and source of the call they mirror, so they are combinational and cannot
//! change the program's cycle-level timing.

use super::source_map::{mangle_call, mangle_ga, Probe, ProbeKind};
use crate::il::*;

pub fn run(program: &Program) -> (Program, Vec<Probe>) {
    let mut program = program.clone();
    let mut probes = Vec::new();
    let index: Vec<String> = program.components.iter().map(|c| c.name.clone()).collect();
    for comp_name in index {
        instrument_component(&mut program, &comp_name, &mut probes);
    }
    (program, probes)
}

/// What a go-port assignment calls.
enum Callee {
    Group(String),
    Cell(String),
    Primitive(String),
}

fn instrument_component(program: &mut Program, comp_name: &str, probes: &mut Vec<Probe>) {
    let comp = program.component(comp_name).expect("component exists");

    // (group, probe kind, callee, calls), collected before mutation
    struct PendingProbe {
        group: String,
        kind: ProbeKind,
        child: Option<String>,
        calls: Vec<(Guard, Atom)>,
    }
    let mut pending = Vec::new();

    for group in &comp.groups {
        pending.push(PendingProbe {
            group: group.name.clone(),
            kind: ProbeKind::GA,
            child: None,
            calls: Vec::new(),
        });
        // one call probe per (parent group, callee) pair
        let mut calls: Vec<(ProbeKind, String, Vec<(Guard, Atom)>)> = Vec::new();
        for asgn in &group.assignments {
            let Some(callee) = classify_call(program, comp, &asgn.dst) else { continue };
            let (kind, child) = match callee {
                Callee::Group(name) => (ProbeKind::CG, name),
                Callee::Cell(name) => (ProbeKind::CC, name),
                Callee::Primitive(name) => (ProbeKind::CP, name),
            };
            match calls.iter_mut().find(|(k, c, _)| *k == kind && *c == child) {
                Some((_, _, list)) => list.push((asgn.guard.clone(), asgn.src.clone())),
                None => calls.push((kind, child, vec![(asgn.guard.clone(), asgn.src.clone())])),
            }
        }
        for (kind, child, list) in calls {
            pending.push(PendingProbe {
                group: group.name.clone(),
                kind,
                child: Some(child),
                calls: list,
            });
        }
    }

    let comp = program.component_mut(comp_name).expect("component exists");
    for p in pending {
        let name = match (&p.kind, &p.child) {
            (ProbeKind::GA, _) => mangle_ga(&p.group, comp_name),
            (kind, Some(child)) => mangle_call(*kind, child, &p.group, comp_name),
            _ => unreachable!(),
        };
        comp.cells.push(Cell {
            name: name.clone(),
            proto: CellProto::Primitive(PrimitiveKind::Wire { width: 1 }),
            attributes: Attributes(vec![Attribute::flag(attrs::PROTECTED)]),
            span: Span::default(),
        });
        let (guard, src) = match p.calls.len() {
            // GA probes are driven high for the group's whole scope.
            0 => (Guard::True, Atom::Lit(Literal { width: 1, value: 1 })),
            // A call probe copies the call's right-hand side verbatim.
            1 => (p.calls[0].0.clone(), p.calls[0].1.clone()),
            // Same callee launched by several assignments: fold each
            // guard?src pair into a disjunction so one probe covers them.
            _ => {
                let mut combined: Option<Guard> = None;
                for (guard, src) in &p.calls {
                    let term = guard.clone().and(atom_as_guard(src));
                    combined = Some(match combined {
                        None => term,
                        Some(acc) => acc.or(term),
                    });
                }
                (combined.unwrap(), Atom::Lit(Literal { width: 1, value: 1 }))
            }
        };
        let group = comp.group_mut(&p.group).expect("group exists");
        group.assignments.push(Assignment {
            dst: PortRef::Cell { cell: name.clone(), port: "in".into() },
            guard,
            src,
            span: Span::default(),
        });
        probes.push(Probe {
            kind: p.kind,
            name,
            component: comp_name.to_string(),
            parent: p.group,
            child: p.child,
        });
    }
}

fn atom_as_guard(atom: &Atom) -> Guard {
    match atom {
        Atom::Lit(l) if l.value != 0 => Guard::True,
        other => Guard::Atom(other.clone()),
    }
}

fn classify_call(program: &Program, comp: &Component, dst: &PortRef) -> Option<Callee> {
    match dst {
        PortRef::Hole { group, hole: Hole::Go } => Some(Callee::Group(group.clone())),
        PortRef::Cell { cell, port } => {
            let c = comp.cell(cell)?;
            match &c.proto {
                CellProto::Primitive(kind) => {
                    if kind.go_port() == Some(port.as_str()) {
                        Some(Callee::Primitive(cell.clone()))
                    } else {
                        None
                    }
                }
                CellProto::Component(name) => {
                    // user component: launched through its go port
                    let _ = program.component(name);
                    if port == "go" {
                        Some(Callee::Cell(cell.clone()))
                    } else {
                        None
                    }
                }
            }
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::il::parse::parse;
    use crate::il::print::print;

    const MY_MULT: &str = r#"
component main() -> () {
  cells {
    mult = seq_mult(32, 3);
    r = std_reg(32);
  }
  wires {
    group myMult {
      mult.left = 32'd6;
      mult.right = 32'd7;
      mult.go = !mult.done ? 1'd1;
      r.in = mult.out;
      r.write_en = mult.done ? 1'd1;
      myMult[done] = r.done;
    }
  }
  control { myMult; }
}
"#;

    #[test]
    fn mult_group_probes_match_convention() {
        let (out, probes) = run(&parse(MY_MULT).unwrap());
        let text = print(&out);
        assert!(text.contains("myMult__main__GA.in = 1'd1;"), "{text}");
        assert!(text.contains("mult__myMult__main__CP.in = !mult.done ? 1'd1;"), "{text}");
        assert!(text.contains("r__myMult__main__CP.in = mult.done ? 1'd1;"), "{text}");
        let names: Vec<_> = probes.iter().map(|p| p.name.as_str()).collect();
        assert!(names.contains(&"myMult__main__GA"));
        assert!(names.contains(&"mult__myMult__main__CP"));
        assert!(names.contains(&"r__myMult__main__CP"));
        // probe cells are protected from dead-code cleanup
        let main = out.main().unwrap();
        assert!(main.cell("myMult__main__GA").unwrap().attributes.has(attrs::PROTECTED));
    }

    #[test]
    fn group_without_calls_gets_only_ga() {
        let src = r#"
component main() -> () {
  cells { e = std_eq(4); w = std_wire(1); }
  wires { comb group peek { e.left = 4'd1; e.right = 4'd1; w.in = e.out; } }
  control {}
}
"#;
        let (_, probes) = run(&parse(src).unwrap());
        assert_eq!(probes.len(), 1);
        assert_eq!(probes[0].kind, ProbeKind::GA);
        assert_eq!(probes[0].parent, "peek");
    }

    #[test]
    fn instrumented_program_still_validates() {
        let (out, _) = run(&parse(MY_MULT).unwrap());
        let diags = crate::il::validate(&out);
        assert!(diags.is_empty(), "{diags:?}");
    }
}
