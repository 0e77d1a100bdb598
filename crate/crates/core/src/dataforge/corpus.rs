use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::dataforge::E2ESample;

/// Keeps samples with at least `min_positive` changed pixels in their valid area.
pub fn filter_pairs(samples: Vec<E2ESample>, min_positive: usize) -> Vec<E2ESample> {
    samples
        .into_iter()
        .filter(|s| s.valid_positives() >= min_positive)
        .collect()
}

/// Per-sample counts feeding the corpus table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleCounts {
    pub event: String,
    pub split: String,
    pub positives: u64,
    pub negatives: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub images: u64,
    pub positives: u64,
    pub negatives: u64,
}

impl Counts {
    fn add(&mut self, s: &SampleCounts) {
        self.images += 1;
        self.positives += s.positives;
        self.negatives += s.negatives;
    }
}

/// Image / positive / negative counts per event and split.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StatsTable {
    cells: BTreeMap<(String, String), Counts>,
}

pub const ALL_EVENTS: &str = "all";
pub const ALL_SPLITS: &str = "total";

impl StatsTable {
    pub fn from_counts<'a>(samples: impl IntoIterator<Item = &'a SampleCounts>) -> Self {
        let mut cells: BTreeMap<(String, String), Counts> = BTreeMap::new();
        for s in samples {
            cells
                .entry((s.event.clone(), s.split.clone()))
                .or_default()
                .add(s);
        }
        Self { cells }
    }

    pub fn get(&self, event: &str, split: &str) -> Counts {
        self.cells
            .get(&(event.to_string(), split.to_string()))
            .copied()
            .unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Rows in table order: each event's splits followed by its total, then
    /// the cross-event totals per split and overall.
    pub fn rows(&self) -> Vec<(String, String, Counts)> {
        if self.cells.is_empty() {
            return Vec::new();
        }
        let splits: BTreeSet<&String> = self.cells.keys().map(|(_, s)| s).collect();
        let mut rows = Vec::new();
        let mut per_split: BTreeMap<&String, Counts> = BTreeMap::new();
        let mut grand = Counts::default();
        let mut current: Option<(&String, Counts)> = None;
        for ((event, split), c) in &self.cells {
            if let Some((ev, total)) = current {
                if ev != event {
                    rows.push((ev.clone(), ALL_SPLITS.to_string(), total));
                    current = None;
                }
            }
            let entry = current.get_or_insert((event, Counts::default()));
            merge(&mut entry.1, c);
            merge(per_split.entry(split).or_default(), c);
            merge(&mut grand, c);
            rows.push((event.clone(), split.clone(), *c));
        }
        if let Some((ev, total)) = current {
            rows.push((ev.clone(), ALL_SPLITS.to_string(), total));
        }
        for split in splits {
            rows.push((ALL_EVENTS.to_string(), split.clone(), per_split[split]));
        }
        rows.push((ALL_EVENTS.to_string(), ALL_SPLITS.to_string(), grand));
        rows
    }

    /// `event,split,I,P,N` with LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("event,split,I,P,N\n");
        for (event, split, c) in self.rows() {
            writeln!(out, "{event},{split},{},{},{}", c.images, c.positives, c.negatives).unwrap();
        }
        out
    }
}

fn merge(into: &mut Counts, c: &Counts) {
    into.images += c.images;
    into.positives += c.positives;
    into.negatives += c.negatives;
}

/// Corpus table; `split_of` maps a sample id to its split name.
pub fn dataset_stats(samples: &[E2ESample], split_of: impl Fn(&str) -> String) -> StatsTable {
    let counts: Vec<SampleCounts> = samples
        .iter()
        .map(|s| SampleCounts {
            event: s.event_name.clone(),
            split: split_of(&s.id),
            positives: s.valid_positives() as u64,
            negatives: s.valid_negatives() as u64,
        })
        .collect();
    StatsTable::from_counts(&counts)
}
