//! Exact rational simplex for fractional edge covers.
//!
//! The cover LP `min 1·x, Ax >= 1, x >= 0` is solved through its dual, the
//! fractional packing `max 1·y, A^T y <= 1, y >= 0`, whose slack basis is
//! feasible from the start. Pivoting uses Bland's rule, so it terminates. The
//! primal optimum is read off the final objective row and checked against the
//! dual value before it is returned.

use num::{BigRational, One, Signed, Zero};

/// Optimal fractional cover: weight per set and total weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalCover {
    pub weights: Vec<BigRational>,
    pub value: BigRational,
}

/// Minimum fractional cover of elements `0..n` by `sets`.
///
/// Returns `None` when some element lies in no set.
pub fn fractional_cover(n: usize, sets: &[Vec<usize>]) -> Option<FractionalCover> {
    let m = sets.len();
    if (0..n).any(|v| !sets.iter().any(|s| s.contains(&v))) {
        return None;
    }
    if n == 0 {
        return Some(FractionalCover { weights: vec![BigRational::zero(); m], value: BigRational::zero() });
    }
    // Columns: y_0..y_{n-1}, s_0..s_{m-1}, rhs.
    let cols = n + m;
    let mut t: Vec<Vec<BigRational>> = (0..m)
        .map(|e| {
            let mut row = vec![BigRational::zero(); cols + 1];
            for &v in &sets[e] {
                row[v] = BigRational::one();
            }
            row[n + e] = BigRational::one();
            row[cols] = BigRational::one();
            row
        })
        .collect();
    let mut obj = vec![BigRational::zero(); cols + 1];
    for c in obj.iter_mut().take(n) {
        *c = -BigRational::one();
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    while let Some(enter) = (0..cols).find(|&j| obj[j].is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[cols] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((l, r)) => ratio < *r || (ratio == *r && basis[i] < basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // Each y_v appears with coefficient one in a row of a set containing v,
        // so the packing LP is bounded.
        let (r, _) = leave.expect("packing LP is bounded");
        let p = t[r][enter].clone();
        for x in t[r].iter_mut() {
            *x /= &p;
        }
        let pivot = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        let f = obj[enter].clone();
        for (x, y) in obj.iter_mut().zip(&pivot) {
            *x -= &f * y;
        }
        basis[r] = enter;
    }

    let value = obj[cols].clone();
    let weights: Vec<BigRational> = (0..m).map(|e| obj[n + e].clone()).collect();
    let total: BigRational = weights.iter().sum();
    assert_eq!(total, value, "primal and dual objective disagree");
    for v in 0..n {
        let cover: BigRational = (0..m).filter(|&e| sets[e].contains(&v)).map(|e| weights[e].clone()).sum();
        assert!(cover >= BigRational::one(), "recovered cover is infeasible");
    }
    Some(FractionalCover { weights, value })
}

fn ceil(r: &BigRational) -> usize {
    let c = r.ceil().to_integer();
    c.try_into().expect("cover size fits in usize")
}

/// Minimum integral cover of `0..n` by `sets`, as indices of the chosen
/// sets, sorted. Branch and bound seeded with a greedy cover, using the
/// rounded-up LP value of the residual instance as lower bound.
pub fn integral_cover(n: usize, sets: &[Vec<usize>]) -> Option<Vec<usize>> {
    fractional_cover(n, sets)?;
    let mut best: Vec<usize> = greedy(n, sets);
    let mut chosen = Vec::new();
    let uncovered: Vec<bool> = vec![true; n];
    branch(sets, &uncovered, &mut chosen, &mut best);
    best.sort_unstable();
    Some(best)
}

fn greedy(n: usize, sets: &[Vec<usize>]) -> Vec<usize> {
    let mut left: Vec<bool> = vec![true; n];
    let mut out = Vec::new();
    while left.iter().any(|&b| b) {
        let (i, _) = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.iter().filter(|&&v| left[v]).count()))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        for &v in &sets[i] {
            left[v] = false;
        }
        out.push(i);
    }
    out
}

fn branch(sets: &[Vec<usize>], uncovered: &[bool], chosen: &mut Vec<usize>, best: &mut Vec<usize>) {
    let rest: Vec<usize> = (0..uncovered.len()).filter(|&v| uncovered[v]).collect();
    if rest.is_empty() {
        if chosen.len() < best.len() {
            *best = chosen.clone();
        }
        return;
    }
    if chosen.len() + 1 >= best.len() {
        return;
    }
    let pos: Vec<Option<usize>> = {
        let mut p = vec![None; uncovered.len()];
        for (i, &v) in rest.iter().enumerate() {
            p[v] = Some(i);
        }
        p
    };
    let residual: Vec<Vec<usize>> = sets.iter().map(|s| s.iter().filter_map(|&v| pos[v]).collect()).collect();
    let lb = fractional_cover(rest.len(), &residual).map(|c| ceil(&c.value)).unwrap_or(usize::MAX);
    if chosen.len() + lb >= best.len() {
        return;
    }
    let pivot = *rest
        .iter()
        .min_by_key(|&&v| sets.iter().filter(|s| s.contains(&v)).count())
        .unwrap();
    for (i, s) in sets.iter().enumerate() {
        if !s.contains(&pivot) {
            continue;
        }
        let mut next = uncovered.to_vec();
        for &v in s {
            next[v] = false;
        }
        chosen.push(i);
        branch(sets, &next, chosen, best);
        chosen.pop();
    }
}
