use thiserror::Error;

use super::{HnswIndex, NodeId, MAX_LEVEL};

/// A broken structural invariant, named by the check that failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantViolation {
    #[error("vector block holds {actual} values, expected {expected}")]
    VectorBlockSize { expected: usize, actual: usize },
    #[error("node {node} has level {level} above the maximum {max}", max = MAX_LEVEL)]
    LevelTooHigh { node: NodeId, level: usize },
    #[error("node {node} has {lists} layer lists but level {level}")]
    LayerCount { node: NodeId, level: usize, lists: usize },
    #[error("node {node} layer {layer}: degree {degree} exceeds cap {cap}")]
    DegreeCap { node: NodeId, layer: usize, degree: usize, cap: usize },
    #[error("node {node} layer {layer}: link to unknown node {target}")]
    DanglingLink { node: NodeId, layer: usize, target: u32 },
    #[error("node {node} layer {layer}: link to {target}, which does not reach that layer")]
    LinkAboveLevel { node: NodeId, layer: usize, target: NodeId },
    #[error("node {node} layer {layer}: self-loop")]
    SelfLoop { node: NodeId, layer: usize },
    #[error("node {node} layer {layer}: duplicate link to {target}")]
    DuplicateLink { node: NodeId, layer: usize, target: NodeId },
    #[error("layer {layer}: {node} links {target} but not the reverse")]
    Asymmetric { node: NodeId, layer: usize, target: NodeId },
    #[error("enter point present = {present} but index holds {len} elements")]
    EnterPointPresence { present: bool, len: usize },
    #[error("enter point {node} has level {level}, max layer is {max_layer}")]
    EnterPointLevel { node: NodeId, level: usize, max_layer: usize },
    #[error("max layer {max_layer} differs from highest node level {highest}")]
    MaxLayer { max_layer: usize, highest: usize },
}

impl HnswIndex {
    /// Full structural scan: layer membership, degree caps, id ranges,
    /// symmetry, self-loops, duplicates and the enter-point level.
    pub fn check_invariants(&self) -> Result<(), InvariantViolation> {
        let n = self.levels.len();
        if self.data.len() != n * self.dim {
            return Err(InvariantViolation::VectorBlockSize {
                expected: n * self.dim,
                actual: self.data.len(),
            });
        }
        if self.links.len() != n {
            return Err(InvariantViolation::LayerCount {
                node: NodeId(self.links.len().min(n) as u32),
                level: 0,
                lists: 0,
            });
        }
        for (i, lists) in self.links.iter().enumerate() {
            let node = NodeId(i as u32);
            let level = self.levels[i] as usize;
            if level > MAX_LEVEL {
                return Err(InvariantViolation::LevelTooHigh { node, level });
            }
            if lists.len() != level + 1 {
                return Err(InvariantViolation::LayerCount {
                    node,
                    level,
                    lists: lists.len(),
                });
            }
            for (layer, list) in lists.iter().enumerate() {
                let cap = self.params.cap(layer);
                if list.len() > cap {
                    return Err(InvariantViolation::DegreeCap {
                        node,
                        layer,
                        degree: list.len(),
                        cap,
                    });
                }
                for (j, &target) in list.iter().enumerate() {
                    if target.index() >= n {
                        return Err(InvariantViolation::DanglingLink {
                            node,
                            layer,
                            target: target.0,
                        });
                    }
                    if target == node {
                        return Err(InvariantViolation::SelfLoop { node, layer });
                    }
                    if (self.levels[target.index()] as usize) < layer {
                        return Err(InvariantViolation::LinkAboveLevel { node, layer, target });
                    }
                    if list[..j].contains(&target) {
                        return Err(InvariantViolation::DuplicateLink { node, layer, target });
                    }
                    if !self.links[target.index()][layer].contains(&node) {
                        return Err(InvariantViolation::Asymmetric { node, layer, target });
                    }
                }
            }
        }

        match self.enter_point {
            None if n > 0 => {
                return Err(InvariantViolation::EnterPointPresence { present: false, len: n })
            }
            Some(_) if n == 0 => {
                return Err(InvariantViolation::EnterPointPresence { present: true, len: 0 })
            }
            Some(ep) => {
                if ep.index() >= n {
                    return Err(InvariantViolation::DanglingLink {
                        node: ep,
                        layer: self.max_layer,
                        target: ep.0,
                    });
                }
                let level = self.levels[ep.index()] as usize;
                if level != self.max_layer {
                    return Err(InvariantViolation::EnterPointLevel {
                        node: ep,
                        level,
                        max_layer: self.max_layer,
                    });
                }
            }
            None => {}
        }
        let highest = self.levels.iter().copied().max().unwrap_or(0) as usize;
        if highest != self.max_layer {
            return Err(InvariantViolation::MaxLayer {
                max_layer: self.max_layer,
                highest,
            });
        }
        Ok(())
    }
}
