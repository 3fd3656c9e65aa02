//! Static priority search tree over items `0..m` (the item index is its
//! x-coordinate) answering `x in [a, b], priority >= t` in
//! O(log m + output) node visits.

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Node {
    item: u32,
    prio: i64,
    // largest x stored in the left subtree
    split: u32,
    left: u32,
    right: u32,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct PrioritySearchTree {
    nodes: Vec<Node>,
    root: u32,
}

impl PrioritySearchTree {
    pub fn build(prio: &[i64], ops: &mut u64) -> Self {
        let mut tree = PrioritySearchTree {
            nodes: Vec::with_capacity(prio.len()),
            root: NIL,
        };
        let items: Vec<u32> = (0..prio.len() as u32).collect();
        tree.root = tree.build_rec(&items, prio, ops);
        tree
    }

    fn build_rec(&mut self, items: &[u32], prio: &[i64], ops: &mut u64) -> u32 {
        if items.is_empty() {
            return NIL;
        }
        // heap top: highest priority, smallest x on ties
        let mut best = 0;
        for (j, &it) in items.iter().enumerate().skip(1) {
            if prio[it as usize] > prio[items[best] as usize] {
                best = j;
            }
        }
        *ops += items.len() as u64;
        let item = items[best];
        let rest: Vec<u32> = items
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != best)
            .map(|(_, &it)| it)
            .collect();
        let idx = self.nodes.len() as u32;
        let left_len = rest.len().div_ceil(2);
        self.nodes.push(Node {
            item,
            prio: prio[item as usize],
            split: if left_len > 0 { rest[left_len - 1] } else { item },
            left: NIL,
            right: NIL,
        });
        let left = self.build_rec(&rest[..left_len], prio, ops);
        let right = self.build_rec(&rest[left_len..], prio, ops);
        let node = &mut self.nodes[idx as usize];
        node.left = left;
        node.right = right;
        idx
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Number of node levels.
    #[cfg(test)]
    pub fn height(&self) -> usize {
        fn h(t: &PrioritySearchTree, n: u32) -> usize {
            if n == NIL {
                return 0;
            }
            let node = &t.nodes[n as usize];
            1 + h(t, node.left).max(h(t, node.right))
        }
        h(self, self.root)
    }

    /// Calls `report` for every item with `a <= x <= b` and priority `>= t`.
    pub fn query(&self, a: u32, b: u32, t: i64, probes: &mut u64, report: &mut impl FnMut(u32)) {
        if self.root != NIL && a <= b {
            self.visit(self.root, a, b, t, probes, report);
        }
    }

    fn visit(&self, n: u32, a: u32, b: u32, t: i64, probes: &mut u64, report: &mut impl FnMut(u32)) {
        *probes += 1;
        let node = self.nodes[n as usize];
        if node.prio < t {
            return;
        }
        if a <= node.item && node.item <= b {
            report(node.item);
        }
        if node.left != NIL && a <= node.split {
            self.visit(node.left, a, b, t, probes, report);
        }
        if node.right != NIL && b > node.split {
            self.visit(node.right, a, b, t, probes, report);
        }
    }
}
