//! Ranked assignment.
//!
//! * [`solve`]: rectangular linear sum assignment (rows ≤ columns) by
//!   shortest augmenting paths with dual potentials. `f64::INFINITY` marks a
//!   forbidden pairing.
//! * [`murty`]: the `k` cheapest assignments in nondecreasing cost order.
//! * [`k_best_subsets`]: the `k` most probable outcomes of independent
//!   Bernoulli trials, in nonincreasing probability order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Dense row-major cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "cost matrix shape mismatch");
        Self { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::new(rows.len(), cols, rows.iter().flatten().copied().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// Total cost of `assignment` (column per row).
    pub fn cost_of(&self, assignment: &[usize]) -> f64 {
        assignment
            .iter()
            .enumerate()
            .map(|(r, &c)| self.get(r, c))
            .sum()
    }
}

/// A complete row → column assignment and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Column assigned to each row.
    pub columns: Vec<usize>,
    pub cost: f64,
}

/// Minimum-cost assignment of every row to a distinct column.
///
/// Returns `None` when no assignment avoids forbidden entries or when there
/// are more rows than columns.
pub fn solve(costs: &CostMatrix) -> Option<Assignment> {
    let n = costs.rows;
    let m = costs.cols;
    if n == 0 {
        return Some(Assignment {
            columns: Vec::new(),
            cost: 0.0,
        });
    }
    if n > m {
        return None;
    }
    // 1-based potentials; p[j] is the row matched to column j, 0 if free.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0; m + 1];
    let mut used = vec![false; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = costs.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if !delta.is_finite() {
                return None;
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut columns = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            columns[p[j] - 1] = j - 1;
        }
    }
    let cost = costs.cost_of(&columns);
    cost.is_finite().then_some(Assignment { columns, cost })
}

struct Node {
    cost: f64,
    columns: Vec<usize>,
    matrix: CostMatrix,
    first_free_row: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost; ties broken on the assignment for determinism
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.columns.cmp(&self.columns))
    }
}

/// Murty's ranked assignment: up to `k` assignments in nondecreasing cost.
pub fn murty(costs: &CostMatrix, k: usize) -> Vec<Assignment> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let Some(best) = solve(costs) else {
        return out;
    };
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        cost: best.cost,
        columns: best.columns,
        matrix: costs.clone(),
        first_free_row: 0,
    });
    while let Some(node) = heap.pop() {
        out.push(Assignment {
            columns: node.columns.clone(),
            cost: costs.cost_of(&node.columns),
        });
        if out.len() == k {
            break;
        }
        let mut fixed = node.matrix;
        for row in node.first_free_row..costs.rows {
            let col = node.columns[row];
            let mut child = fixed.clone();
            child.set(row, col, f64::INFINITY);
            if let Some(sol) = solve(&child) {
                heap.push(Node {
                    cost: sol.cost,
                    columns: sol.columns,
                    matrix: child,
                    first_free_row: row,
                });
            }
            // force (row, col) for the remaining partitions
            for c in 0..costs.cols {
                if c != col {
                    fixed.set(row, c, f64::INFINITY);
                }
            }
            for r in 0..costs.rows {
                if r != row {
                    fixed.set(r, col, f64::INFINITY);
                }
            }
        }
    }
    out
}

/// The `k` most probable subsets of independent events with probabilities
/// `probs`, as `(sorted member indices, ln probability)` in nonincreasing
/// probability order. Impossible subsets are never returned.
pub fn k_best_subsets(probs: &[f64], k: usize) -> Vec<(Vec<usize>, f64)> {
    if k == 0 {
        return Vec::new();
    }
    // Start from the mode; each flip away from it costs a nonnegative amount.
    let mut mode = Vec::new();
    let mut log_mode = 0.0;
    let mut flips: Vec<(f64, usize)> = Vec::new();
    for (i, &q) in probs.iter().enumerate() {
        let (lin, lout) = (q.ln(), (1.0 - q).ln());
        if lin >= lout {
            mode.push(i);
            log_mode += lin;
        } else {
            log_mode += lout;
        }
        let penalty = (lin - lout).abs();
        if penalty.is_finite() {
            flips.push((penalty, i));
        }
    }
    if log_mode == f64::NEG_INFINITY {
        return Vec::new();
    }
    flips.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let apply = |flipped: &[usize]| {
        let mut members: Vec<usize> = mode.clone();
        for &f in flipped {
            let item = flips[f].1;
            match members.binary_search(&item) {
                Ok(pos) => {
                    members.remove(pos);
                }
                Err(pos) => members.insert(pos, item),
            }
        }
        members
    };

    let mut out = vec![(mode.clone(), log_mode)];
    // Enumerates flip sets by nondecreasing total penalty: from a set whose
    // largest flip is j, either add j+1 or replace j with j+1.
    #[derive(PartialEq)]
    struct Entry(f64, Vec<usize>);
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> Ordering {
            other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
        }
    }
    let mut heap = BinaryHeap::new();
    if !flips.is_empty() {
        heap.push(Entry(flips[0].0, vec![0]));
    }
    while out.len() < k {
        let Some(Entry(total, set)) = heap.pop() else {
            break;
        };
        out.push((apply(&set), log_mode - total));
        let last = *set.last().unwrap();
        if last + 1 < flips.len() {
            let mut add = set.clone();
            add.push(last + 1);
            heap.push(Entry(total + flips[last + 1].0, add));
            let mut swap = set;
            *swap.last_mut().unwrap() = last + 1;
            heap.push(Entry(total - flips[last].0 + flips[last + 1].0, swap));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate_assignments;
    use proptest::prelude::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn square_assignment() {
        let c = CostMatrix::from_rows(&[vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]]);
        let a = solve(&c).unwrap();
        assert_eq!(a.columns, vec![1, 0, 2]);
        assert_eq!(a.cost, 5.0);
    }

    #[test]
    fn rectangular_and_forbidden() {
        let c = CostMatrix::from_rows(&[vec![INF, 1.0, 9.0, INF], vec![INF, 2.0, INF, 7.0]]);
        let a = solve(&c).unwrap();
        assert_eq!(a.cost, 8.0);
        assert_eq!(a.columns, vec![1, 3]);
        let infeasible = CostMatrix::from_rows(&[vec![1.0, INF], vec![2.0, INF]]);
        assert!(solve(&infeasible).is_none());
        assert!(solve(&CostMatrix::filled(3, 2, 1.0)).is_none());
        assert_eq!(solve(&CostMatrix::filled(0, 3, 1.0)).unwrap().cost, 0.0);
    }

    #[test]
    fn negative_costs() {
        let c = CostMatrix::from_rows(&[vec![-700.0, -650.0], vec![-690.0, -10.0]]);
        let a = solve(&c).unwrap();
        assert_eq!(a.cost, -1340.0);
    }

    #[test]
    fn murty_enumerates_everything_in_order() {
        let c = CostMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![3.0, 6.0, 9.5]]);
        let all = murty(&c, 100);
        assert_eq!(all.len(), 6);
        assert!(all.windows(2).all(|w| w[0].cost <= w[1].cost));
        let mut oracle: Vec<f64> = enumerate_assignments(&c).iter().map(|a| a.1).collect();
        oracle.sort_by(f64::total_cmp);
        let got: Vec<f64> = all.iter().map(|a| a.cost).collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn subsets_of_four_births() {
        let subsets = k_best_subsets(&[0.06; 4], 100);
        assert_eq!(subsets.len(), 16);
        assert!(subsets[0].0.is_empty());
        assert!((subsets[0].1.exp() - 0.94f64.powi(4)).abs() < 1e-15);
        let total: f64 = subsets.iter().map(|s| s.1.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(subsets.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn subsets_with_certain_events() {
        let s = k_best_subsets(&[1.0, 0.0, 0.3], 10);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].0, vec![0]);
        assert_eq!(s[1].0, vec![0, 2]);
    }

    fn brute_subsets(probs: &[f64]) -> Vec<f64> {
        let n = probs.len();
        let mut v: Vec<f64> = (0..1u32 << n)
            .map(|mask| {
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { probs[i] } else { 1.0 - probs[i] })
                    .product::<f64>()
            })
            .filter(|p| *p > 0.0)
            .collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    proptest! {
        #[test]
        fn murty_matches_exhaustive_top_k(
            rows in 1usize..=3,
            extra in 0usize..=2,
            vals in proptest::collection::vec(0.0f64..10.0, 15),
            holes in proptest::collection::vec(any::<bool>(), 15),
            k in 1usize..8,
        ) {
            let cols = rows + extra;
            let data: Vec<f64> = (0..rows * cols)
                .map(|i| if holes[i] && i % 3 == 0 { INF } else { vals[i] })
                .collect();
            let c = CostMatrix::new(rows, cols, data);
            let got = murty(&c, k);
            let mut oracle: Vec<f64> = enumerate_assignments(&c).iter().map(|a| a.1).collect();
            oracle.sort_by(f64::total_cmp);
            oracle.truncate(k);
            prop_assert_eq!(got.len(), oracle.len());
            for (g, o) in got.iter().zip(&oracle) {
                prop_assert!((g.cost - o).abs() < 1e-9);
            }
            prop_assert!(got.windows(2).all(|w| w[0].cost <= w[1].cost + 1e-12));
        }

        #[test]
        fn subsets_match_brute_force(
            probs in proptest::collection::vec(0.0f64..=1.0, 0..7),
            k in 1usize..20,
        ) {
            let got: Vec<f64> = k_best_subsets(&probs, k).iter().map(|s| s.1.exp()).collect();
            let mut oracle = brute_subsets(&probs);
            oracle.truncate(k);
            prop_assert_eq!(got.len(), oracle.len());
            for (g, o) in got.iter().zip(&oracle) {
                prop_assert!((g - o).abs() < 1e-12);
            }
        }
    }
}
