//! Record of the subcases taken, with a machine check of each label's guard.

use serde::Serialize;

/// Every subcase label the constructor can emit.
///
/// "1.1.1.2m(a)" and "1.1.1.2m(b)" cover the 1-rescuable vertex sitting in
/// the component before K₀ with its split edges pointing into K₀, which is
/// not a relabelling of the K₁ configuration.
pub const CASE_LABELS: &[&str] = &[
    "base",
    "1.1.1.1",
    "1.1.1.2.1",
    "1.1.1.2.2(a)",
    "1.1.1.2.2(b)",
    "1.1.1.2m(a)",
    "1.1.1.2m(b)",
    "1.1.1.3",
    "1.1.2",
    "1.2.1",
    "1.2.2",
    "1.2.3",
    "1.3.1.1",
    "1.3.1.2",
    "1.3.1.3",
    "1.3.2.1",
    "1.3.2.2",
    "2.1",
    "2.2.1.1",
    "2.2.1.2.1(a)",
    "2.2.1.2.1(b)",
    "2.2.1.2.2",
    "2.2.2",
];

/// The coarse groups that acceptance coverage is counted over.
pub const TOP_LEVEL_LABELS: &[&str] = &["1.1.1.*", "1.1.2", "1.2.*", "1.3.*", "2.1", "2.2.*"];

/// Coarse group of a label, `None` for the base case.
pub fn top_level(label: &str) -> Option<&'static str> {
    let group = if label.starts_with("1.1.1.") {
        "1.1.1.*"
    } else if label == "1.1.2" {
        "1.1.2"
    } else if label.starts_with("1.2.") {
        "1.2.*"
    } else if label.starts_with("1.3.") {
        "1.3.*"
    } else if label == "2.1" {
        "2.1"
    } else if label.starts_with("2.2.") {
        "2.2.*"
    } else {
        return None;
    };
    Some(group)
}

/// One region solved during construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub depth: usize,
    pub level: usize,
    pub label: &'static str,
    pub split_dim: Option<usize>,
    /// Faults inside K₀…K₃ in ring order.
    pub component_faults: [usize; 4],
    pub cross_faults: usize,
    /// Minimum fault-free degree inside the components.
    pub split_min_degree: usize,
    /// Whether the prescribed edge lies on the split dimension.
    pub edge_crosses: bool,
    /// Faults in the region after padding.
    pub faults: usize,
    pub padded: usize,
    pub notes: Vec<String>,
}

impl TraceEntry {
    pub(super) fn new(depth: usize, level: usize) -> TraceEntry {
        TraceEntry {
            depth,
            level,
            label: "",
            split_dim: None,
            component_faults: [0; 4],
            cross_faults: 0,
            split_min_degree: 0,
            edge_crosses: false,
            faults: 0,
            padded: 0,
            notes: Vec::new(),
        }
    }
}

/// Regions in the order they were entered; children follow their parent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CaseTrace {
    pub entries: Vec<TraceEntry>,
}

impl CaseTrace {
    pub fn labels(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.label).collect()
    }

    pub fn max_depth(&self) -> usize {
        self.entries.iter().map(|e| e.depth).max().unwrap_or(0)
    }

    /// Checks every label against the vocabulary and its guard.
    pub fn check(&self) -> Result<(), String> {
        for (i, e) in self.entries.iter().enumerate() {
            guard_holds(e).map_err(|m| format!("entry {i} ({}): {m}", e.label))?;
        }
        Ok(())
    }
}

/// The predicate a label's recorded counts must satisfy.
pub fn guard_holds(e: &TraceEntry) -> Result<(), String> {
    if !CASE_LABELS.contains(&e.label) {
        return Err("label outside the vocabulary".into());
    }
    let k = e.level;
    if e.label == "base" {
        return if k == 2 && e.faults <= 3 && e.split_dim.is_none() {
            Ok(())
        } else {
            Err(format!("base entry at level {k} with {} faults", e.faults))
        };
    }
    if k < 3 || e.split_dim.is_none() {
        return Err(format!("split recorded at level {k}"));
    }
    let c = e.component_faults;
    let x = e.cross_faults;
    let d = e.split_min_degree;
    let max = *c.iter().max().unwrap();
    if e.faults != 4 * k - 5 || c.iter().sum::<usize>() + x != e.faults {
        return Err(format!("loads {c:?} + {x} do not add up to 4k-5 = {}", 4 * k - 5));
    }
    let heavy1 = 2 * k - 3;
    let ok = match e.label {
        "1.1.1.1" => !e.edge_crosses && max <= 4 * k - 9 && d == 1 && c[0] >= heavy1,
        "1.1.1.2.1" | "1.1.1.2.2(a)" | "1.1.1.2.2(b)" => {
            let extra = match e.label {
                "1.1.1.2.2(a)" => x <= 3,
                "1.1.1.2.2(b)" => x >= 4,
                _ => true,
            };
            !e.edge_crosses && max <= 4 * k - 9 && d == 1 && c[1] >= heavy1 && extra
        }
        "1.1.1.2m(a)" | "1.1.1.2m(b)" => !e.edge_crosses && max <= 4 * k - 9 && d == 1 && c[3] >= heavy1,
        "1.1.1.3" => !e.edge_crosses && max <= 4 * k - 9 && d == 1 && c[2] >= heavy1,
        "1.1.2" => !e.edge_crosses && max <= 4 * k - 9 && d >= 2 && c[1] <= 2 * k - 4,
        "1.2.1" => !e.edge_crosses && c[0] == 4 * k - 8,
        "1.2.2" => !e.edge_crosses && c[1] == 4 * k - 8,
        "1.2.3" => !e.edge_crosses && c[2] == 4 * k - 8,
        "1.3.1.1" => !e.edge_crosses && d >= 2 && c[0] == 4 * k - 7,
        "1.3.1.2" => !e.edge_crosses && d >= 2 && c[1] == 4 * k - 7,
        "1.3.1.3" => !e.edge_crosses && d >= 2 && c[2] == 4 * k - 7,
        "1.3.2.1" => !e.edge_crosses && d == 1 && c[0] == 4 * k - 7,
        "1.3.2.2" => !e.edge_crosses && d == 1 && (c[1] == 4 * k - 7 || c[2] == 4 * k - 7),
        "2.1" => e.edge_crosses && max <= 4 * k - 9 && x >= 3 && d >= 2 && c[0] <= 2 * k - 4,
        "2.2.1.1" | "2.2.1.2.1(a)" | "2.2.1.2.1(b)" | "2.2.1.2.2" => {
            e.edge_crosses && x >= 3 && d >= 2 && c[0] == 4 * k - 8
        }
        "2.2.2" => e.edge_crosses && x >= 3 && d >= 2 && c[2] == 4 * k - 8,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("guard fails: level {k}, loads {c:?}, cross {x}, min degree {d}, crosses {}", e.edge_crosses))
    }
}
