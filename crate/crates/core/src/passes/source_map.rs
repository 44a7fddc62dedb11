//! Compile-time sidecar mapping instrumentation and lowering artifacts back
//! to the source program: probe registry, compilation-group origins, control
//! register classification, and the cell instantiation tree.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeKind {
    /// Group active: high while the group runs.
    GA,
    /// Group calls group.
    CG,
    /// Group calls a user-component cell.
    CC,
    /// Group calls a sequential primitive.
    CP,
}

impl ProbeKind {
    pub fn suffix(self) -> &'static str {
        match self {
            ProbeKind::GA => "GA",
            ProbeKind::CG => "CG",
            ProbeKind::CC => "CC",
            ProbeKind::CP => "CP",
        }
    }
}

/// One instrumentation wire. The mangled `name` is bit-exact in the VCD:
/// `{group}__{component}__GA` for GA probes and
/// `{child}__{parentGroup}__{component}__{KIND}` for call probes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Probe {
    pub kind: ProbeKind,
    pub name: String,
    pub component: String,
    /// The group whose activity or call this probe tracks.
    pub parent: String,
    /// Callee (group/cell/primitive); absent for GA probes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub child: Option<String>,
}

pub fn mangle_ga(group: &str, component: &str) -> String {
    format!("{group}__{component}__GA")
}

pub fn mangle_call(kind: ProbeKind, child: &str, parent: &str, component: &str) -> String {
    format!("{child}__{parent}__{component}__{}", kind.suffix())
}

/// Identity of a source control block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlId {
    pub component: String,
    pub id: u64,
    /// Control path such as `main/seq/1/par/0/if`; enable sites end in
    /// `/enable`.
    pub path: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegisterClass {
    Fsm,
    Pd,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlRegister {
    pub name: String,
    pub component: String,
    pub class: RegisterClass,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceMap {
    pub probes: Vec<Probe>,
    /// Keyed `{component}.{group}` since compilation-group names are only
    /// unique per component.
    pub control_groups: BTreeMap<String, ControlId>,
    pub control_registers: Vec<ControlRegister>,
    /// Cell instantiation paths (`main`, `main.s1`, ...) to component names.
    pub cell_tree: BTreeMap<String, String>,
}

impl SourceMap {
    pub fn group_key(component: &str, group: &str) -> String {
        format!("{component}.{group}")
    }

    pub fn control_group(&self, component: &str, group: &str) -> Option<&ControlId> {
        self.control_groups.get(&Self::group_key(component, group))
    }

    /// Groups created purely to give a group call a unique site identity.
    pub fn is_enable_site(&self, component: &str, group: &str) -> bool {
        self.control_group(component, group)
            .map(|cid| cid.path.ends_with("/enable"))
            .unwrap_or(false)
    }

    pub fn probes_in(&self, component: &str) -> impl Iterator<Item = &Probe> {
        self.probes.iter().filter(move |p| p.component == component)
    }

    pub fn registers_in(&self, component: &str) -> impl Iterator<Item = &ControlRegister> {
        self.control_registers.iter().filter(move |r| r.component == component)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("source map serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mangling_matches_convention() {
        assert_eq!(mangle_ga("myMult", "main"), "myMult__main__GA");
        assert_eq!(
            mangle_call(ProbeKind::CP, "mult", "myMult", "main"),
            "mult__myMult__main__CP"
        );
    }

    #[test]
    fn json_round_trip() {
        let mut map = SourceMap::default();
        map.probes.push(Probe {
            kind: ProbeKind::GA,
            name: mangle_ga("read", "main"),
            component: "main".into(),
            parent: "read".into(),
            child: None,
        });
        map.control_groups.insert(
            SourceMap::group_key("main", "tdcc"),
            ControlId { component: "main".into(), id: 0, path: "main/seq".into() },
        );
        map.control_registers.push(ControlRegister {
            name: "fsm".into(),
            component: "main".into(),
            class: RegisterClass::Fsm,
        });
        map.cell_tree.insert("main".into(), "main".into());
        let text = map.to_json();
        assert_eq!(SourceMap::from_json(&text).unwrap(), map);
    }
}
