use super::HnswIndex;

/// Structural counts of an index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexStats {
    pub elements: usize,
    pub max_layer: usize,
    pub enter_point_level: Option<usize>,
    /// Number of nodes present in each layer.
    pub layer_population: Vec<usize>,
    /// `degree_histogram[layer][d]` = nodes with degree `d` in that layer.
    pub degree_histogram: Vec<Vec<usize>>,
    /// Sum of all adjacency-list lengths; twice the undirected link count.
    pub total_link_entries: usize,
    /// Number of adjacency lists, one per (node, layer) membership.
    pub adjacency_lists: usize,
    pub mean_level: f64,
}

impl IndexStats {
    pub fn mean_link_entries(&self) -> f64 {
        if self.elements == 0 {
            0.0
        } else {
            self.total_link_entries as f64 / self.elements as f64
        }
    }

    /// Bytes the adjacency block takes in a snapshot: a 4-byte count per
    /// list plus a 4-byte id per link entry.
    pub fn adjacency_bytes(&self) -> u64 {
        4 * (self.adjacency_lists as u64 + self.total_link_entries as u64)
    }
}

impl HnswIndex {
    pub fn stats(&self) -> IndexStats {
        let layers = if self.is_empty() { 0 } else { self.max_layer + 1 };
        let mut layer_population = vec![0usize; layers];
        let mut degree_histogram: Vec<Vec<usize>> = vec![Vec::new(); layers];
        let mut total_link_entries = 0;
        let mut adjacency_lists = 0;
        let mut level_sum = 0usize;
        for (node, lists) in self.links.iter().enumerate() {
            level_sum += self.levels[node] as usize;
            for (layer, list) in lists.iter().enumerate() {
                layer_population[layer] += 1;
                let hist = &mut degree_histogram[layer];
                if hist.len() <= list.len() {
                    hist.resize(list.len() + 1, 0);
                }
                hist[list.len()] += 1;
                total_link_entries += list.len();
                adjacency_lists += 1;
            }
        }
        IndexStats {
            elements: self.len(),
            max_layer: self.max_layer,
            enter_point_level: self.enter_point.map(|ep| self.level(ep)),
            layer_population,
            degree_histogram,
            total_link_entries,
            adjacency_lists,
            mean_level: if self.is_empty() {
                0.0
            } else {
                level_sum as f64 / self.len() as f64
            },
        }
    }
}
