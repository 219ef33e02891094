use std::fmt;

use serde::{Deserialize, Serialize};

use super::archive::{objective_bounds, normalized_sum};
use super::ParetoArchive;

/// The five plans offered to the operator every epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "SLIT-TTFT")]
    Ttft,
    #[serde(rename = "SLIT-Carbon")]
    Carbon,
    #[serde(rename = "SLIT-Water")]
    Water,
    #[serde(rename = "SLIT-Cost")]
    Cost,
    #[serde(rename = "SLIT-Balance")]
    Balance,
}

impl Label {
    pub const ALL: [Label; 5] = [Label::Ttft, Label::Carbon, Label::Water, Label::Cost, Label::Balance];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Ttft => "SLIT-TTFT",
            Label::Carbon => "SLIT-Carbon",
            Label::Water => "SLIT-Water",
            Label::Cost => "SLIT-Cost",
            Label::Balance => "SLIT-Balance",
        }
    }

    /// Objective index minimized by a single-metric label.
    pub fn objective(self) -> Option<usize> {
        match self {
            Label::Ttft => Some(0),
            Label::Carbon => Some(1),
            Label::Water => Some(2),
            Label::Cost => Some(3),
            Label::Balance => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Archive entry id chosen for every label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selections {
    pub ttft: u64,
    pub carbon: u64,
    pub water: u64,
    pub cost: u64,
    pub balance: u64,
}

impl Selections {
    pub fn get(&self, label: Label) -> u64 {
        match label {
            Label::Ttft => self.ttft,
            Label::Carbon => self.carbon,
            Label::Water => self.water,
            Label::Cost => self.cost,
            Label::Balance => self.balance,
        }
    }

    pub fn labels_of(&self, id: u64) -> Vec<Label> {
        Label::ALL.into_iter().filter(|&l| self.get(l) == id).collect()
    }
}

/// Single-objective argmins (ties: lower normalized sum, then lower id) and
/// the argmin of the normalized sum. `None` for an empty archive.
pub fn select_solutions(archive: &ParetoArchive) -> Option<Selections> {
    let entries = archive.entries();
    if entries.is_empty() {
        return None;
    }
    let bounds = objective_bounds(&archive.objectives());
    let sums: Vec<f64> = entries.iter().map(|e| normalized_sum(&e.objectives, &bounds)).collect();
    let pick = |key: &dyn Fn(usize) -> f64| -> u64 {
        let i = (0..entries.len())
            .min_by(|&a, &b| {
                key(a)
                    .total_cmp(&key(b))
                    .then(sums[a].total_cmp(&sums[b]))
                    .then(entries[a].id.cmp(&entries[b].id))
            })
            .unwrap();
        entries[i].id
    };
    Some(Selections {
        ttft: pick(&|i| entries[i].objectives.ttft),
        carbon: pick(&|i| entries[i].objectives.carbon),
        water: pick(&|i| entries[i].objectives.water),
        cost: pick(&|i| entries[i].objectives.cost),
        balance: pick(&|i| sums[i]),
    })
}
