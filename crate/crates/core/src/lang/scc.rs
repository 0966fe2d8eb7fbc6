//! Tarjan's strongly connected components, iterative.

#[derive(Clone, Debug)]
pub struct Sccs {
    /// Component id per node; ids are in reverse topological order.
    pub component_of: Vec<usize>,
    pub count: usize,
}

impl Sccs {
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (n, &c) in self.component_of.iter().enumerate() {
            out[c].push(n);
        }
        out
    }
}

pub fn tarjan(adj: &[Vec<usize>]) -> Sccs {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![UNSEEN; n];
    let mut next_index = 0;
    let mut count = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (node, next edge to look at)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp[w] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    Sccs { component_of: comp, count }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_and_cycle() {
        let adj = vec![vec![1], vec![2], vec![1, 3], vec![]];
        let s = tarjan(&adj);
        assert_eq!(s.count, 3);
        assert_eq!(s.component_of[1], s.component_of[2]);
        assert_ne!(s.component_of[0], s.component_of[3]);
        // sinks come first
        assert!(s.component_of[3] < s.component_of[1]);
        assert!(s.component_of[1] < s.component_of[0]);
    }

    #[test]
    fn deep_path_does_not_overflow() {
        let n = 200_000;
        let adj: Vec<Vec<usize>> = (0..n).map(|i| if i + 1 < n { vec![i + 1] } else { vec![] }).collect();
        assert_eq!(tarjan(&adj).count, n);
    }
}
