//! Simplified static promotion.
//!
//! Infers fixed latencies for dynamic groups, then rewrites control regions
//! whose timing is fully known into `static` seq/par nodes. Promoted regions
//! execute back-to-back with no FSM update cycles between children. No
//! rescheduling or reordering happens here: a seq stays a seq.

use crate::il::*;
use std::collections::BTreeMap;

/// Infer per-group latencies for one component.
///
/// A dynamic group has latency 1 when its done condition is the done port of
/// a register or memory whose write-enable it drives unconditionally. Alias
/// groups (single unconditional group call, forwarded done) inherit their
/// callee's latency. `@promotable(n)` declares a latency outright; static
/// groups already carry one.
pub fn infer_latencies(comp: &Component) -> BTreeMap<String, u64> {
    let mut known: BTreeMap<String, u64> = BTreeMap::new();
    for group in &comp.groups {
        match group.kind {
            GroupKind::Static { latency } => {
                known.insert(group.name.clone(), latency);
            }
            GroupKind::Combinational => {}
            GroupKind::Dynamic => {
                if let Some(n) = group.attributes.num(attrs::PROMOTABLE) {
                    known.insert(group.name.clone(), n);
                } else if infers_single_cycle(comp, group) {
                    known.insert(group.name.clone(), 1);
                }
            }
        }
    }
    // Alias chains resolve iteratively (alias of alias of group).
    loop {
        let mut changed = false;
        for group in &comp.groups {
            if known.contains_key(&group.name) {
                continue;
            }
            if let Some(callee) = alias_callee(group) {
                if let Some(l) = known.get(&callee).copied() {
                    known.insert(group.name.clone(), l);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    known
}

/// done = `cell.done` for a register/memory written under guard True.
fn infers_single_cycle(comp: &Component, group: &Group) -> bool {
    let Some(done) = group.done_assignment() else { return false };
    if !done.guard.is_true() {
        return false;
    }
    let Atom::Port(PortRef::Cell { cell, port }) = &done.src else { return false };
    if port != "done" {
        return false;
    }
    let Some(c) = comp.cell(cell) else { return false };
    let CellProto::Primitive(kind) = &c.proto else { return false };
    let Some(go_port) = kind.go_port() else { return false };
    if matches!(kind, PrimitiveKind::SeqMult { .. }) {
        return false;
    }
    // the write must fire as soon as the group does
    group.assignments.iter().any(|a| {
        a.guard.is_true()
            && matches!(&a.dst, PortRef::Cell { cell: c2, port: p2 } if c2 == cell && p2 == go_port)
            && matches!(&a.src, Atom::Lit(l) if l.value != 0)
    })
}

/// If `group` merely forwards to another group (the shape the metadata pass
/// emits for enable sites), return the callee.
pub fn alias_callee(group: &Group) -> Option<String> {
    let done = group.done_assignment()?;
    let Atom::Port(PortRef::Hole { group: callee, hole: Hole::Done }) = &done.src else {
        return None;
    };
    if !done.guard.is_true() {
        return None;
    }
    let calls_go = group.assignments.iter().any(|a| {
        a.guard.is_true()
            && matches!(&a.dst, PortRef::Hole { group: g, hole: Hole::Go } if g == callee)
            && matches!(&a.src, Atom::Lit(l) if l.value != 0)
    });
    calls_go.then(|| callee.clone())
}

pub fn run(program: &Program) -> Program {
    let mut program = program.clone();
    for comp in &mut program.components {
        let latencies = infer_latencies(comp);
        let mut next_id = next_free_id(&comp.control);
        let control = std::mem::replace(&mut comp.control, Control::empty());
        let (control, _) = promote_node(control, &latencies, &mut next_id);
        comp.control = control;
    }
    program
}

/// Promote one subtree (used by lowering when while desugaring rebuilds a
/// loop body after the main promotion pass already ran).
pub fn promote_subtree(
    ctrl: Control,
    latencies: &BTreeMap<String, u64>,
    next_id: &mut u64,
) -> Control {
    promote_node(ctrl, latencies, next_id).0
}

pub fn next_free_id(ctrl: &Control) -> u64 {
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

/// Returns the rewritten node and its latency when fully static.
fn promote_node(
    ctrl: Control,
    latencies: &BTreeMap<String, u64>,
    next_id: &mut u64,
) -> (Control, Option<u64>) {
    match ctrl {
        Control::Empty { attributes } => (Control::Empty { attributes }, Some(0)),
        Control::Enable { group, attributes, span } => {
            let latency = latencies.get(&group).copied();
            (Control::Enable { group, attributes, span }, latency)
        }
        Control::StaticSeq { latency, children, attributes } => {
            (Control::StaticSeq { latency, children, attributes }, Some(latency))
        }
        Control::StaticPar { latency, children, attributes } => {
            (Control::StaticPar { latency, children, attributes }, Some(latency))
        }
        Control::Seq { children, attributes } => {
            let promoted: Vec<(Control, Option<u64>)> =
                children.into_iter().map(|c| promote_node(c, latencies, next_id)).collect();
            if promoted.iter().all(|(_, l)| l.is_some()) {
                let latency = promoted.iter().map(|(_, l)| l.unwrap()).sum();
                let children = promoted.into_iter().map(|(c, _)| c).collect();
                return (Control::StaticSeq { latency, children, attributes }, Some(latency));
            }
            // Group maximal contiguous runs of >=2 known-latency children
            // into static islands; the rest stays dynamic.
            let mut out: Vec<Control> = Vec::new();
            let mut run: Vec<(Control, u64)> = Vec::new();
            let mut flush = |out: &mut Vec<Control>, run: &mut Vec<(Control, u64)>| {
                if run.len() >= 2 {
                    let latency = run.iter().map(|(_, l)| *l).sum();
                    let children = run.drain(..).map(|(c, _)| c).collect();
                    let mut attributes = Attributes::default();
                    attributes.set(Attribute::num(attrs::ID, *next_id));
                    *next_id += 1;
                    out.push(Control::StaticSeq { latency, children, attributes });
                } else {
                    out.extend(run.drain(..).map(|(c, _)| c));
                }
            };
            for (child, latency) in promoted {
                match latency {
                    Some(l) => run.push((child, l)),
                    None => {
                        flush(&mut out, &mut run);
                        out.push(child);
                    }
                }
            }
            flush(&mut out, &mut run);
            (Control::Seq { children: out, attributes }, None)
        }
        Control::Par { children, attributes } => {
            let promoted: Vec<(Control, Option<u64>)> =
                children.into_iter().map(|c| promote_node(c, latencies, next_id)).collect();
            if promoted.iter().all(|(_, l)| l.is_some()) {
                let latency = promoted.iter().map(|(_, l)| l.unwrap()).max().unwrap_or(0);
                let children = promoted.into_iter().map(|(c, _)| c).collect();
                return (Control::StaticPar { latency, children, attributes }, Some(latency));
            }
            let children = promoted.into_iter().map(|(c, _)| c).collect();
            (Control::Par { children, attributes }, None)
        }
        Control::If { cond, with, then, els, attributes } => {
            // If is never promoted; branches may still be internally static.
            let (then, _) = promote_node(*then, latencies, next_id);
            let (els, _) = promote_node(*els, latencies, next_id);
            (
                Control::If { cond, with, then: Box::new(then), els: Box::new(els), attributes },
                None,
            )
        }
        Control::While { cond, with, body, attributes } => {
            let (body, _) = promote_node(*body, latencies, next_id);
            (Control::While { cond, with, body: Box::new(body), attributes }, None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::il::parse::parse;

    fn five_seq() -> Program {
        let src = r#"
component main() -> () {
  cells { a = std_reg(8); b = std_reg(8); c = std_reg(8); d = std_reg(8); e = std_reg(8); }
  wires {
    group g1 { a.in = 8'd1; a.write_en = 1'd1; g1[done] = a.done; }
    group g2 { b.in = 8'd2; b.write_en = 1'd1; g2[done] = b.done; }
    group g3 { c.in = 8'd3; c.write_en = 1'd1; g3[done] = c.done; }
    group g4 { d.in = 8'd4; d.write_en = 1'd1; g4[done] = d.done; }
    group g5 { e.in = 8'd5; e.write_en = 1'd1; g5[done] = e.done; }
  }
  control { seq { g1; g2; g3; g4; g5; } }
}
"#;
        parse(src).unwrap()
    }

    #[test]
    fn straight_line_seq_promotes_to_sum() {
        let out = run(&five_seq());
        match &out.main().unwrap().control {
            Control::StaticSeq { latency, children, .. } => {
                assert_eq!(*latency, 5);
                assert_eq!(children.len(), 5);
            }
            other => panic!("expected static seq, got {other:?}"),
        }
    }

    #[test]
    fn if_blocks_promotion_but_prefix_and_suffix_promote() {
        let src = r#"
component main() -> () {
  cells { a = std_reg(8); b = std_reg(8); c = std_reg(1); }
  wires {
    group g1 { a.in = 8'd1; a.write_en = 1'd1; g1[done] = a.done; }
    group g2 { b.in = 8'd2; b.write_en = 1'd1; g2[done] = b.done; }
    group g3 { c.in = 1'd1; c.write_en = 1'd1; g3[done] = c.done; }
  }
  control { seq { g1; g2; if c.out { g3; } g1; } }
}
"#;
        let out = run(&parse(src).unwrap());
        let Control::Seq { children, .. } = &out.main().unwrap().control else {
            panic!("seq must stay dynamic");
        };
        assert_eq!(children.len(), 3);
        assert!(matches!(&children[0], Control::StaticSeq { latency: 2, .. }));
        assert!(matches!(&children[1], Control::If { .. }));
        assert!(matches!(&children[2], Control::Enable { .. }));
    }

    #[test]
    fn while_body_promotes_while_stays_dynamic() {
        let src = r#"
component main() -> () {
  cells {
    i = std_reg(8); acc = std_reg(8); add = std_add(8); lt = std_lt(8); cond_reg = std_reg(1);
  }
  wires {
    group init { i.in = 8'd0; i.write_en = 1'd1; init[done] = i.done; }
    group work { acc.in = add.out; add.left = acc.out; add.right = 8'd1; acc.write_en = 1'd1; work[done] = acc.done; }
    group chk { lt.left = i.out; lt.right = 8'd3; cond_reg.in = lt.out; cond_reg.write_en = 1'd1; chk[done] = cond_reg.done; }
  }
  control { seq { init; chk; while cond_reg.out { seq { work; chk; } } } }
}
"#;
        let out = run(&parse(src).unwrap());
        let Control::Seq { children, .. } = &out.main().unwrap().control else { panic!() };
        assert!(matches!(&children[0], Control::StaticSeq { latency: 2, .. }));
        let Control::While { body, .. } = &children[1] else { panic!("{children:?}") };
        assert!(matches!(**body, Control::StaticSeq { latency: 2, .. }));
    }

    #[test]
    fn promotable_attribute_and_mult_groups() {
        let src = r#"
component main() -> () {
  cells { m = seq_mult(8, 3); r = std_reg(8); }
  wires {
    @promotable(4) group mul {
      m.left = 8'd3; m.right = 8'd5;
      m.go = !m.done ? 1'd1;
      r.in = m.out; r.write_en = m.done ? 1'd1;
      mul[done] = r.done;
    }
  }
  control { mul; }
}
"#;
        let p = parse(src).unwrap();
        let lat = infer_latencies(p.main().unwrap());
        assert_eq!(lat.get("mul"), Some(&4));
        // without the attribute the mult-terminated group is not inferable
        let mut p2 = p.clone();
        p2.component_mut("main").unwrap().group_mut("mul").unwrap().attributes.remove(attrs::PROMOTABLE);
        assert_eq!(infer_latencies(p2.main().unwrap()).get("mul"), None);
    }
}
