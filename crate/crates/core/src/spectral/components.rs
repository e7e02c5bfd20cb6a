use serde::Serialize;

use crate::incidence::IncidenceMatrix;
use crate::Side;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExcludedLabel {
    pub label: String,
    pub side: Side,
}

/// Outcome of [`largest_component`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    /// Number of connected components in the input.
    pub components: usize,
    pub excluded: Vec<ExcludedLabel>,
}

impl ComponentReport {
    pub fn is_empty(&self) -> bool {
        self.excluded.is_empty()
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Component id per node of the bipartite graph; locations come first
/// (`0..C`), then activities (`C..C+P`).
fn component_ids(m: &IncidenceMatrix) -> Vec<usize> {
    let c = m.num_locations();
    let mut sets = DisjointSets::new(c + m.num_activities());
    for ((i, j), &v) in m.values().indexed_iter() {
        if v == 1 {
            sets.union(i, c + j);
        }
    }
    (0..sets.parent.len()).map(|x| sets.find(x)).collect()
}

/// Number of connected components of the bipartite location-activity graph.
/// Isolated nodes count as their own component.
pub fn component_count(m: &IncidenceMatrix) -> usize {
    let ids = component_ids(m);
    ids.iter().enumerate().filter(|&(x, &root)| x == root).count()
}

/// Restricts the matrix to the connected component with the most locations.
///
/// Ties go to the component with more activities, then to the
/// lexicographically smallest sorted list of location labels (and activity
/// labels after that).
pub fn largest_component(m: &IncidenceMatrix) -> (IncidenceMatrix, ComponentReport) {
    let c = m.num_locations();
    let ids = component_ids(m);
    let mut roots: Vec<usize> = ids.clone();
    roots.sort_unstable();
    roots.dedup();

    let members = |root: usize, side: Side| -> Vec<usize> {
        match side {
            Side::Location => (0..c).filter(|&i| ids[i] == root).collect(),
            Side::Activity => (0..m.num_activities()).filter(|&j| ids[c + j] == root).collect(),
        }
    };
    let sorted_labels = |idx: &[usize], side: Side| -> Vec<&str> {
        let mut l: Vec<&str> = idx.iter().map(|&k| m.labels(side)[k].as_str()).collect();
        l.sort_unstable();
        l
    };

    let best = roots
        .iter()
        .map(|&root| (members(root, Side::Location), members(root, Side::Activity)))
        .min_by(|(la, aa), (lb, ab)| {
            lb.len()
                .cmp(&la.len())
                .then(ab.len().cmp(&aa.len()))
                .then_with(|| sorted_labels(la, Side::Location).cmp(&sorted_labels(lb, Side::Location)))
                .then_with(|| sorted_labels(aa, Side::Activity).cmp(&sorted_labels(ab, Side::Activity)))
        });
    let Some((rows, cols)) = best else {
        return (m.clone(), ComponentReport::default());
    };

    let mut excluded = Vec::new();
    for (side, kept, n) in [(Side::Location, &rows, c), (Side::Activity, &cols, m.num_activities())] {
        excluded.extend((0..n).filter(|k| !kept.contains(k)).map(|k| ExcludedLabel {
            label: m.labels(side)[k].clone(),
            side,
        }));
    }
    let report = ComponentReport {
        components: roots.len(),
        excluded,
    };
    (m.select(&rows, &cols), report)
}
