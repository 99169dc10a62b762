//! Convex hulls, polygon objectives and the exact U-max statistic.
//!
//! The U-max statistic over a sample is the largest perimeter (or area) of
//! the convex hull of any `n` sample points. Only extreme points of the full
//! hull can appear in an optimal subset: with the other vertices fixed the
//! perimeter is convex and the area is affine in a single vertex, so each
//! vertex can be pushed to an extreme point of the sample hull without
//! decreasing the objective. [`umax`] therefore computes the hull and runs a
//! dynamic program over hull vertices ([`max_kgon`]); [`umax_bruteforce`]
//! enumerates all subsets and serves as the reference.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;

/// Hull sizes above this trigger a warning; the DP is cubic in hull size.
pub const HULL_SIZE_WARNING: usize = 2000;

/// Largest number of subsets [`umax_bruteforce`] agrees to enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> DiskPoint<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    /// Builds a point and checks that it lies in the closed unit disk, up to a
    /// few ulps of slack for points produced by `r·cos φ`, `r·sin φ`.
    pub fn in_disk(x: T, y: T) -> Result<Self> {
        let p = Self { x, y };
        let slack = T::lit(4.0) * T::epsilon();
        if !(p.norm_sqr() <= T::one() + slack) {
            return Err(domain("point", format!("({x}, {y}) lies outside the unit disk")));
        }
        Ok(p)
    }

    #[inline]
    pub fn norm_sqr(&self) -> T {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn dist(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Rotation about the origin by `angle` radians (counterclockwise).
    pub fn rotated(&self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    pub fn to_polar(&self) -> PolarPoint<T> {
        PolarPoint::new(self.y.atan2(self.x), self.norm_sqr().sqrt())
    }
}

/// Angle/radius form of a point; the angle is kept in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint<T> {
    pub phi: T,
    pub r: T,
}

impl<T: Scalar> PolarPoint<T> {
    pub fn new(phi: T, r: T) -> Self {
        Self {
            phi: wrap_angle(phi),
            r,
        }
    }

    pub fn to_cartesian(&self) -> DiskPoint<T> {
        let (s, c) = self.phi.sin_cos();
        DiskPoint::new(self.r * c, self.r * s)
    }
}

/// Reduces an angle modulo 2π into `[0, 2π)`.
pub fn wrap_angle<T: Scalar>(phi: T) -> T {
    let tau = T::TAU();
    let w = phi % tau;
    let w = if w < T::zero() { w + tau } else { w };
    // `w + tau` can round up to exactly tau
    if w >= tau {
        T::zero()
    } else {
        w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Perimeter,
    Area,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Perimeter => "perimeter",
            Objective::Area => "area",
        })
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "perimeter" | "per" => Ok(Objective::Perimeter),
            "area" => Ok(Objective::Area),
            other => Err(domain("objective", format!("unknown objective `{other}`"))),
        }
    }
}

/// Counterclockwise polygon given by indices into a point slice.
///
/// Chains of one or two vertices are flagged `degenerate`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonChain {
    pub vertices: Vec<usize>,
    pub degenerate: bool,
}

impl PolygonChain {
    /// Wraps a vertex list that the caller guarantees to be CCW and strictly
    /// convex.
    pub fn from_ccw(vertices: Vec<usize>) -> Self {
        let degenerate = vertices.len() < 3;
        Self {
            vertices,
            degenerate,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UMaxResult<T> {
    pub value: T,
    /// Hull vertices of the optimal subset, counterclockwise from the
    /// smallest index.
    pub vertex_indices: Vec<usize>,
    pub vertex_count: usize,
}

#[inline]
fn cross<T: Scalar>(o: &DiskPoint<T>, a: &DiskPoint<T>, b: &DiskPoint<T>) -> T {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Monotone-chain convex hull. Collinear boundary points and exact
/// duplicates are dropped; among duplicates the lowest index is kept.
pub fn convex_hull<T: Scalar>(points: &[DiskPoint<T>]) -> Result<PolygonChain> {
    if points.is_empty() {
        return Err(domain("points", "convex hull of an empty set"));
    }
    if let Some(i) = points
        .iter()
        .position(|p| !(p.x.is_finite() && p.y.is_finite()))
    {
        return Err(Error::NonFinite(format!("point {i}")));
    }

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&points[a], &points[b]);
        pa.x.partial_cmp(&pb.x)
            .unwrap_or(Ordering::Equal)
            .then(pa.y.partial_cmp(&pb.y).unwrap_or(Ordering::Equal))
            .then(a.cmp(&b))
    });
    order.dedup_by(|b, a| points[*a] == points[*b]);

    if order.len() == 1 {
        return Ok(PolygonChain::from_ccw(order));
    }

    let mut hull: Vec<usize> = Vec::with_capacity(order.len() + 1);
    for &i in &order {
        while hull.len() >= 2
            && cross(
                &points[hull[hull.len() - 2]],
                &points[hull[hull.len() - 1]],
                &points[i],
            ) <= T::zero()
        {
            hull.pop();
        }
        hull.push(i);
    }
    let lower_len = hull.len() + 1;
    for &i in order.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(
                &points[hull[hull.len() - 2]],
                &points[hull[hull.len() - 1]],
                &points[i],
            ) <= T::zero()
        {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();

    Ok(PolygonChain::from_ccw(hull))
}

/// Perimeter of the closed chain. A two-vertex chain is a segment, whose
/// perimeter as a convex body is twice its length.
pub fn polygon_perimeter<T: Scalar>(chain: &PolygonChain, points: &[DiskPoint<T>]) -> T {
    perimeter_of(&chain.vertices, points)
}

/// Shoelace area; zero for degenerate chains.
pub fn polygon_area<T: Scalar>(chain: &PolygonChain, points: &[DiskPoint<T>]) -> T {
    area_of(&chain.vertices, points)
}

pub fn polygon_objective<T: Scalar>(
    chain: &PolygonChain,
    points: &[DiskPoint<T>],
    objective: Objective,
) -> T {
    match objective {
        Objective::Perimeter => polygon_perimeter(chain, points),
        Objective::Area => polygon_area(chain, points),
    }
}

fn perimeter_of<T: Scalar>(vertices: &[usize], points: &[DiskPoint<T>]) -> T {
    match vertices.len() {
        0 | 1 => T::zero(),
        2 => T::lit(2.0) * points[vertices[0]].dist(&points[vertices[1]]),
        m => (0..m).fold(T::zero(), |acc, i| {
            acc + points[vertices[i]].dist(&points[vertices[(i + 1) % m]])
        }),
    }
}

fn area_of<T: Scalar>(vertices: &[usize], points: &[DiskPoint<T>]) -> T {
    let m = vertices.len();
    if m < 3 {
        return T::zero();
    }
    let twice = (0..m).fold(T::zero(), |acc, i| {
        let a = &points[vertices[i]];
        let b = &points[vertices[(i + 1) % m]];
        acc + (a.x * b.y - b.x * a.y)
    });
    twice / T::lit(2.0)
}

/// Candidate ordering for U-max ties: larger value wins, then the
/// lexicographically smallest sorted index list.
fn better<T: Scalar>(value: T, sorted: &[usize], best_value: T, best_sorted: &[usize]) -> bool {
    match value.partial_cmp(&best_value) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Equal) => sorted < best_sorted,
        _ => false,
    }
}

fn sorted_copy(v: &[usize]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

fn result_for<T: Scalar>(
    vertices: Vec<usize>,
    points: &[DiskPoint<T>],
    objective: Objective,
) -> UMaxResult<T> {
    let mut vertices = vertices;
    // canonical start: the smallest sample index
    if let Some(pos) = vertices.iter().enumerate().min_by_key(|(_, &v)| v).map(|(i, _)| i) {
        vertices.rotate_left(pos);
    }
    let chain = PolygonChain::from_ccw(vertices);
    let value = polygon_objective(&chain, points, objective);
    UMaxResult {
        value,
        vertex_count: chain.len(),
        vertex_indices: chain.vertices,
    }
}

/// Best polygon with at most `k` vertices chosen among the vertices of
/// `hull` (which must be a hull produced by [`convex_hull`] on `points`).
///
/// For each starting hull vertex `s`, `best[j][v]` holds the best open chain
/// `s → … → v` through `j` vertices taken in hull order after `s`; closing
/// the chain adds the edge `v → s` (perimeter) or nothing (area is built as a
/// fan of triangles rooted at `s`). Cost is `O(h³·k)` for hull size `h`.
pub fn max_kgon<T: Scalar>(
    hull: &PolygonChain,
    points: &[DiskPoint<T>],
    k: usize,
    objective: Objective,
) -> Result<UMaxResult<T>> {
    if k < 2 {
        return Err(domain("k", format!("polygon size must be at least 2 (got {k})")));
    }
    if hull.is_empty() {
        return Err(domain("hull", "empty hull"));
    }
    let h = hull.len();
    if h <= k {
        return Ok(result_for(hull.vertices.clone(), points, objective));
    }
    if h > HULL_SIZE_WARNING {
        log::warn!("hull has {h} vertices; the O(h^3 k) polygon DP will be slow");
    }

    let hv = &hull.vertices;
    let pt = |pos: usize| &points[hv[pos]];
    let step_gain = |s: usize, u: usize, v: usize| -> T {
        match objective {
            Objective::Perimeter => pt(u).dist(pt(v)),
            Objective::Area => cross(pt(s), pt(u), pt(v)) / T::lit(2.0),
        }
    };
    // a two-vertex chain closes back over the same edge
    let closing_gain = |s: usize, v: usize| -> T {
        match objective {
            Objective::Perimeter => pt(v).dist(pt(s)),
            Objective::Area => T::zero(),
        }
    };

    // path reconstruction in original sample indices, sorted
    let chain_of = |pred: &[Vec<usize>], s: usize, j: usize, v: usize| -> Vec<usize> {
        let mut out = Vec::with_capacity(j);
        let (mut jj, mut vv) = (j, v);
        while jj >= 2 {
            out.push(vv);
            vv = pred[jj][vv];
            jj -= 1;
        }
        out.push(s);
        out.reverse();
        out
    };
    let to_sample_sorted = |chain: &[usize]| -> Vec<usize> {
        let mapped: Vec<usize> = chain.iter().map(|&p| hv[p]).collect();
        sorted_copy(&mapped)
    };

    let neg_inf = T::neg_infinity();
    let mut best_value = neg_inf;
    let mut best_chain: Vec<usize> = Vec::new();
    let mut best_sorted: Vec<usize> = Vec::new();

    let mut value = vec![vec![neg_inf; h]; k + 1];
    let mut pred = vec![vec![usize::MAX; h]; k + 1];

    for s in 0..h {
        for row in value.iter_mut() {
            row.fill(neg_inf);
        }
        for v in s + 1..h {
            value[2][v] = match objective {
                Objective::Perimeter => pt(s).dist(pt(v)),
                Objective::Area => T::zero(),
            };
            pred[2][v] = s;
        }
        for j in 3..=k {
            for v in s + j - 1..h {
                let mut bv = neg_inf;
                let mut bu = usize::MAX;
                for u in s + j - 2..v {
                    let prev = value[j - 1][u];
                    if prev == neg_inf {
                        continue;
                    }
                    let cand = prev + step_gain(s, u, v);
                    let take = match cand.partial_cmp(&bv) {
                        Some(Ordering::Greater) => true,
                        Some(Ordering::Equal) if bu != usize::MAX => {
                            let mut a = to_sample_sorted(&chain_of(&pred, s, j - 1, u));
                            let mut b = to_sample_sorted(&chain_of(&pred, s, j - 1, bu));
                            a.push(hv[v]);
                            b.push(hv[v]);
                            a.sort_unstable();
                            b.sort_unstable();
                            a < b
                        }
                        _ => false,
                    };
                    if take {
                        bv = cand;
                        bu = u;
                    }
                }
                value[j][v] = bv;
                pred[j][v] = bu;
            }
        }
        for j in 2..=k {
            for v in s + j - 1..h {
                if value[j][v] == neg_inf {
                    continue;
                }
                let closed = value[j][v] + closing_gain(s, v);
                if closed < best_value {
                    continue;
                }
                let chain = chain_of(&pred, s, j, v);
                let sorted = to_sample_sorted(&chain);
                if best_chain.is_empty() || better(closed, &sorted, best_value, &best_sorted) {
                    best_value = closed;
                    best_chain = chain;
                    best_sorted = sorted;
                }
            }
        }
    }

    let vertices = best_chain.iter().map(|&p| hv[p]).collect();
    Ok(result_for(vertices, points, objective))
}

/// Exact U-max statistic: the largest objective over all `n`-point subsets.
pub fn umax<T: Scalar>(
    points: &[DiskPoint<T>],
    n: usize,
    objective: Objective,
) -> Result<UMaxResult<T>> {
    check_sizes(points.len(), n)?;
    let hull = convex_hull(points)?;
    max_kgon(&hull, points, n, objective)
}

fn check_sizes(have: usize, n: usize) -> Result<()> {
    if n < 2 {
        return Err(domain("n", format!("kernel degree must be at least 2 (got {n})")));
    }
    if have < n {
        return Err(Error::TooFewPoints { have, need: n });
    }
    Ok(())
}

/// `C(n, k)` in 128-bit arithmetic, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Reference U-max by exhaustive enumeration of all `C(N, n)` subsets.
pub fn umax_bruteforce<T: Scalar>(
    points: &[DiskPoint<T>],
    n: usize,
    objective: Objective,
) -> Result<UMaxResult<T>> {
    check_sizes(points.len(), n)?;
    let subsets = binomial(points.len(), n);
    if subsets > BRUTE_FORCE_LIMIT {
        return Err(Error::BruteForceGuard {
            subsets,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    let mut best: Option<(T, Vec<usize>, Vec<usize>)> = None;
    let mut subset = Vec::with_capacity(n);
    let mut combo: Vec<usize> = (0..n).collect();
    loop {
        subset.clear();
        subset.extend(combo.iter().map(|&i| points[i]));
        let hull = convex_hull(&subset)?;
        let value = polygon_objective(&hull, &subset, objective);
        let vertices: Vec<usize> = hull.vertices.iter().map(|&i| combo[i]).collect();
        let sorted = sorted_copy(&vertices);
        let replace = match &best {
            None => true,
            Some((bv, _, bs)) => better(value, &sorted, *bv, bs),
        };
        if replace {
            best = Some((value, vertices, sorted));
        }
        if !next_combination(&mut combo, points.len()) {
            break;
        }
    }

    let (_, vertices, _) = best.expect("at least one subset");
    Ok(result_for(vertices, points, objective))
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
