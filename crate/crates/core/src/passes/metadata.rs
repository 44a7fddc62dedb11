//! Control-structure metadata pass.
//!
//! Assigns a unique `@id` to every control block and rewrites each group
//! enable to call a fresh single-site alias group, so two calls of the same
//! group from different control sites stay distinguishable all the way down
//! to the signal trace.

use crate::il::*;

/// Attribute marking the alias groups this pass creates.
pub const WRAPPER_ATTR: &str = "wrapper";

pub fn run(program: &Program) -> Program {
    let mut program = program.clone();
    for comp in &mut program.components {
        let mut st = CompState { next_id: next_free_id(&comp.control), sites: Vec::new() };
        let mut control = std::mem::replace(&mut comp.control, Control::empty());
        walk(&mut control, &mut st, true);
        comp.control = control;

        for site in st.sites {
            let callee_kind = comp
                .group(&site.callee)
                .map(|g| g.kind)
                .unwrap_or(GroupKind::Dynamic);
            let kind = match callee_kind {
                // The alias inherits the callee's timing discipline.
                GroupKind::Static { latency } => GroupKind::Static { latency },
                _ => GroupKind::Dynamic,
            };
            let mut assignments = vec![Assignment {
                dst: PortRef::Hole { group: site.callee.clone(), hole: Hole::Go },
                guard: Guard::True,
                src: Atom::Lit(Literal { width: 1, value: 1 }),
                span: Span::default(),
            }];
            if matches!(kind, GroupKind::Dynamic) {
                assignments.push(Assignment {
                    dst: PortRef::Hole { group: site.name.clone(), hole: Hole::Done },
                    guard: Guard::True,
                    src: Atom::Port(PortRef::Hole {
                        group: site.callee.clone(),
                        hole: Hole::Done,
                    }),
                    span: Span::default(),
                });
            }
            comp.groups.push(Group {
                name: site.name,
                kind,
                assignments,
                attributes: Attributes(vec![Attribute::flag(WRAPPER_ATTR)]),
                span: Span::default(),
            });
        }
    }
    program
}

struct Site {
    name: String,
    callee: String,
}

struct CompState {
    next_id: u64,
    sites: Vec<Site>,
}

fn next_free_id(ctrl: &Control) -> u64 {
    let mut max = None;
    fn scan(c: &Control, max: &mut Option<u64>) {
        if let Some(id) = c.attributes().num(attrs::ID) {
            *max = Some(max.map_or(id, |m: u64| m.max(id)));
        }
        match c {
            Control::Seq { children, .. }
            | Control::Par { children, .. }
            | Control::StaticSeq { children, .. }
            | Control::StaticPar { children, .. } => children.iter().for_each(|c| scan(c, max)),
            Control::If { then, els, .. } => {
                scan(then, max);
                scan(els, max);
            }
            Control::While { body, .. } => scan(body, max),
            Control::Empty { .. } | Control::Enable { .. } => {}
        }
    }
    scan(ctrl, &mut max);
    max.map_or(0, |m| m + 1)
}

fn assign_id(ctrl: &mut Control, st: &mut CompState) {
    if ctrl.attributes().num(attrs::ID).is_none() {
        let id = st.next_id;
        st.next_id += 1;
        ctrl.attributes_mut().set(Attribute::num(attrs::ID, id));
    }
}

fn walk(ctrl: &mut Control, st: &mut CompState, root: bool) {
    match ctrl {
        Control::Empty { .. } => {
            // Only a root Empty carries metadata; nested Empties (absent
            // else-branches) are structural filler.
            if root {
                assign_id(ctrl, st);
            }
        }
        Control::Enable { .. } => {
            assign_id(ctrl, st);
            if let Control::Enable { group, .. } = ctrl {
                let site_ix = st.sites.len();
                let callee = group.clone();
                let name = format!("{callee}__site{site_ix}");
                st.sites.push(Site { name: name.clone(), callee });
                *group = name;
            }
        }
        Control::Seq { .. }
        | Control::Par { .. }
        | Control::StaticSeq { .. }
        | Control::StaticPar { .. } => {
            assign_id(ctrl, st);
            match ctrl {
                Control::Seq { children, .. }
                | Control::Par { children, .. }
                | Control::StaticSeq { children, .. }
                | Control::StaticPar { children, .. } => {
                    for c in children {
                        walk(c, st, false);
                    }
                }
                _ => unreachable!(),
            }
        }
        Control::If { .. } => {
            assign_id(ctrl, st);
            if let Control::If { then, els, .. } = ctrl {
                walk(then, st, false);
                if !els.is_empty() {
                    walk(els, st, false);
                }
            }
        }
        Control::While { .. } => {
            assign_id(ctrl, st);
            if let Control::While { body, .. } = ctrl {
                walk(body, st, false);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::il::parse::parse;

    fn count_ids(ctrl: &Control) -> usize {
        let mut n = usize::from(ctrl.attributes().num(attrs::ID).is_some());
        match ctrl {
            Control::Seq { children, .. }
            | Control::Par { children, .. }
            | Control::StaticSeq { children, .. }
            | Control::StaticPar { children, .. } => {
                n += children.iter().map(count_ids).sum::<usize>()
            }
            Control::If { then, els, .. } => n += count_ids(then) + count_ids(els),
            Control::While { body, .. } => n += count_ids(body),
            _ => {}
        }
        n
    }

    #[test]
    fn empty_control_gets_single_id() {
        let p = parse("component main()->(){cells{}wires{}control{}}").unwrap();
        let out = run(&p);
        let main = out.main().unwrap();
        assert_eq!(main.control.attributes().num(attrs::ID), Some(0));
        assert_eq!(count_ids(&main.control), 1);
    }

    #[test]
    fn two_sites_get_distinct_aliases() {
        let src = r#"
component main() -> () {
  cells { r = std_reg(8); }
  wires { group g { r.in = 8'd1; r.write_en = 1'd1; g[done] = r.done; } }
  control { seq { g; g; } }
}
"#;
        let out = run(&parse(src).unwrap());
        let main = out.main().unwrap();
        let Control::Seq { children, .. } = &main.control else { panic!() };
        let names: Vec<_> = children
            .iter()
            .map(|c| match c {
                Control::Enable { group, .. } => group.clone(),
                _ => panic!(),
            })
            .collect();
        assert_eq!(names, vec!["g__site0", "g__site1"]);
        assert!(main.group("g__site0").unwrap().attributes.has(WRAPPER_ATTR));
        // aliases pass go through and forward done
        let w = main.group("g__site1").unwrap();
        assert_eq!(w.assignments.len(), 2);
    }

    #[test]
    fn ids_are_unique_and_dense_enough() {
        let src = r#"
component main() -> () {
  cells { r = std_reg(1); }
  wires { group g { r.in = 1'd1; r.write_en = 1'd1; g[done] = r.done; } }
  control { seq { g; par { g; g; } if r.out { g; } } }
}
"#;
        let out = run(&parse(src).unwrap());
        let main = out.main().unwrap();
        assert!(crate::il::validate(&out)
            .iter()
            .all(|d| d.kind != crate::il::DiagnosticKind::DuplicateId));
        // seq, 4 enables, par, if = 7 nodes with ids
        assert_eq!(count_ids(&main.control), 7);
    }
}
