//! Derivative-free searches: golden section, Brent, grid-seeded nested golden
//! section in two dimensions and cyclic coordinate refinement in more.

use alloc::vec::Vec;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
pub fn golden_min(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    if b - a <= tol {
        let x = 0.5 * (a + b);
        return (x, f(x));
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Golden-section search that also evaluates both endpoints, so monotone
/// objectives return the better end of the bracket.
pub fn golden_min_closed(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let fa = f(a);
    let fb = f(b);
    let (x, fx) = golden_min(&mut f, a, b, tol);
    let mut best = (x, fx);
    if fa < best.1 || best.1.is_nan() {
        best = (a, fa);
    }
    if fb < best.1 {
        best = (b, fb);
    }
    best
}

/// [`golden_min_closed`] with parabolic steps.
pub fn brent_min_closed(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let mut g = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let fa = g(a);
    let fb = g(b);
    let mut best = brent_min(&mut g, a, b, tol);
    if fa < best.1 {
        best = (a, fa);
    }
    if fb < best.1 {
        best = (b, fb);
    }
    best
}

/// Brent's method (golden section with parabolic steps) maximizing `f` on `[a, b]`.
/// Infinite values are allowed; `-inf` marks infeasible points.
pub fn brent_max(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let mut g = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    };
    let (x, v) = brent_min(&mut g, a, b, tol);
    (x, -v)
}

fn brent_min(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const C: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut x = a + C * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let tol1 = tol + 1e-12 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 && fx.is_finite() && fw.is_finite() && fv.is_finite() {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if m >= x { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x >= m { a - x } else { b - x };
            d = C * e;
        }
        let u = if d.abs() >= tol1 { x + d } else if d > 0.0 { x + tol1 } else { x - tol1 };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Maximizes a possibly multimodal `f` on `[a, b]`: a uniform grid of `grid`
/// points, then Brent refinement around every grid-local maximum. Endpoints
/// are candidates too.
pub fn multistart_max(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, grid: usize, tol: f64) -> (f64, f64) {
    let grid = grid.max(3);
    let xs: Vec<f64> = (0..grid).map(|i| a + (b - a) * i as f64 / (grid - 1) as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = (xs[0], vals[0]);
    for i in 0..grid {
        if vals[i] > best.1 || best.1.is_nan() {
            best = (xs[i], vals[i]);
        }
    }
    for i in 0..grid {
        let left = if i == 0 { f64::NEG_INFINITY } else { vals[i - 1] };
        let right = if i + 1 == grid { f64::NEG_INFINITY } else { vals[i + 1] };
        if vals[i] == f64::NEG_INFINITY || vals[i] < left || vals[i] < right {
            continue;
        }
        let lo = xs[i.saturating_sub(1)];
        let hi = xs[(i + 1).min(grid - 1)];
        let (x, v) = brent_max(&mut f, lo, hi, tol);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Box and grid for the two-parameter search.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Grid nodes per axis, endpoints included.
    pub x_nodes: Vec<f64>,
    pub y_nodes: Vec<f64>,
    /// Absolute tolerance of the golden-section refinement on each axis.
    pub tol: f64,
}

impl Grid2 {
    pub fn uniform(x_range: (f64, f64), nx: usize, y_range: (f64, f64), ny: usize, tol: f64) -> Self {
        Grid2 { x_range, y_range, x_nodes: linspace(x_range, nx), y_nodes: linspace(y_range, ny), tol }
    }

    /// Same box with every grid cell split in two.
    pub fn refined(&self) -> Self {
        Grid2 {
            x_nodes: refine_nodes(&self.x_nodes),
            y_nodes: refine_nodes(&self.y_nodes),
            ..self.clone()
        }
    }
}

pub fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect()
}

fn refine_nodes(nodes: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * nodes.len());
    for w in nodes.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.extend(nodes.last());
    out
}

/// Result of a multi-parameter search.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub point: Vec<f64>,
    pub value: f64,
    /// Some coordinate ended within tolerance of the search box.
    pub on_boundary: bool,
    pub evaluations: usize,
}

/// Minimizes `f(x, y)` on the box of `grid`: full grid scan, then golden section
/// over `y` in the cells adjacent to the best node, each `y` minimized over `x`
/// by an inner golden section in the adjacent `x` cells. With `seed`, the grid
/// scan is replaced by a local bracket of one grid spacing around the seed; if
/// the seeded result lands on its bracket edge the full search is run instead.
/// The returned value is never worse than the best evaluated grid node.
pub fn minimize_2d(mut f: impl FnMut(f64, f64) -> f64, grid: &Grid2, seed: Option<(f64, f64)>) -> Optimum {
    let mut evals = 0usize;
    let mut call = |x: f64, y: f64, evals: &mut usize| {
        *evals += 1;
        let v = f(x, y);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let dx = spacing(&grid.x_nodes);
    let dy = spacing(&grid.y_nodes);

    if let Some((sx, sy)) = seed {
        let xb = (clamp(sx - dx, grid.x_range), clamp(sx + dx, grid.x_range));
        let yb = (clamp(sy - dy, grid.y_range), clamp(sy + dy, grid.y_range));
        let (x, y, v) = nested_golden(&mut |x, y| call(x, y, &mut evals), xb, yb, grid.tol);
        let seed_val = call(clamp(sx, grid.x_range), clamp(sy, grid.y_range), &mut evals);
        let inner_edge = |t: f64, b: (f64, f64), r: (f64, f64)| {
            (t - b.0 < 2.0 * grid.tol && b.0 > r.0) || (b.1 - t < 2.0 * grid.tol && b.1 < r.1)
        };
        if !inner_edge(x, xb, grid.x_range) && !inner_edge(y, yb, grid.y_range) && v <= seed_val {
            return finish(alloc::vec![x, y], v, grid, evals);
        }
    }

    let mut best = (grid.x_nodes[0], grid.y_nodes[0], f64::INFINITY, 0usize, 0usize);
    for (j, &y) in grid.y_nodes.iter().enumerate() {
        for (i, &x) in grid.x_nodes.iter().enumerate() {
            let v = call(x, y, &mut evals);
            if v < best.2 {
                best = (x, y, v, i, j);
            }
        }
    }
    let (bx, by, bv, i, j) = best;
    let xb = (grid.x_nodes[i.saturating_sub(1)], grid.x_nodes[(i + 1).min(grid.x_nodes.len() - 1)]);
    let yb = (grid.y_nodes[j.saturating_sub(1)], grid.y_nodes[(j + 1).min(grid.y_nodes.len() - 1)]);
    let (x, y, v) = nested_golden(&mut |x, y| call(x, y, &mut evals), xb, yb, grid.tol);
    if v <= bv {
        finish(alloc::vec![x, y], v, grid, evals)
    } else {
        finish(alloc::vec![bx, by], bv, grid, evals)
    }
}

fn nested_golden(f: &mut impl FnMut(f64, f64) -> f64, xb: (f64, f64), yb: (f64, f64), tol: f64) -> (f64, f64, f64) {
    let mut best = (xb.0, yb.0, f64::INFINITY);
    let (y, _) = brent_min_closed(
        |y| {
            let (x, v) = brent_min_closed(|x| f(x, y), xb.0, xb.1, tol);
            if v < best.2 {
                best = (x, y, v);
            }
            v
        },
        yb.0,
        yb.1,
        tol,
    );
    let _ = y;
    best
}

fn finish(point: Vec<f64>, value: f64, grid: &Grid2, evaluations: usize) -> Optimum {
    let near = |t: f64, r: (f64, f64)| t - r.0 <= 2.0 * grid.tol || r.1 - t <= 2.0 * grid.tol;
    let on_boundary = near(point[0], grid.x_range) || near(point[1], grid.y_range);
    Optimum { point, value, on_boundary, evaluations }
}

fn spacing(nodes: &[f64]) -> f64 {
    nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

#[inline]
fn clamp(t: f64, r: (f64, f64)) -> f64 {
    t.max(r.0).min(r.1)
}

/// Box, grid and tolerance for [`minimize_coordinate`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridN {
    pub ranges: Vec<(f64, f64)>,
    pub nodes: Vec<Vec<f64>>,
    pub tol: f64,
    pub max_cycles: usize,
}

impl GridN {
    pub fn uniform(ranges: &[(f64, f64)], counts: &[usize], tol: f64) -> Self {
        GridN {
            ranges: ranges.to_vec(),
            nodes: ranges.iter().zip(counts).map(|(&r, &n)| linspace(r, n)).collect(),
            tol,
            max_cycles: 60,
        }
    }

    pub fn refined(&self) -> Self {
        GridN { nodes: self.nodes.iter().map(|n| refine_nodes(n)).collect(), ..self.clone() }
    }
}

/// Minimizes `f` over a box: tensor grid scan (or a seed), then cyclic
/// golden-section line searches along each coordinate with brackets that
/// shrink as the moves shrink. Never returns a value worse than its start.
pub fn minimize_coordinate(mut f: impl FnMut(&[f64]) -> f64, grid: &GridN, seed: Option<&[f64]>) -> Optimum {
    let dims = grid.ranges.len();
    let mut evals = 0usize;
    let mut call = |p: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(p);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut point: Vec<f64>;
    let mut value;
    let spacings: Vec<f64> = grid.nodes.iter().map(|n| spacing(n)).collect();
    match seed {
        Some(s) => {
            point = s.iter().zip(&grid.ranges).map(|(&t, &r)| clamp(t, r)).collect();
            value = call(&point, &mut evals);
        }
        None => {
            point = grid.nodes.iter().map(|n| n[0]).collect();
            value = f64::INFINITY;
            let mut idx = alloc::vec![0usize; dims];
            let mut cur = point.clone();
            'scan: loop {
                for d in 0..dims {
                    cur[d] = grid.nodes[d][idx[d]];
                }
                let v = call(&cur, &mut evals);
                if v < value {
                    value = v;
                    point.copy_from_slice(&cur);
                }
                let mut d = 0;
                loop {
                    idx[d] += 1;
                    if idx[d] < grid.nodes[d].len() {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                    if d == dims {
                        break 'scan;
                    }
                }
            }
        }
    }
    let mut steps = spacings.clone();
    for _ in 0..grid.max_cycles {
        let mut largest_move: f64 = 0.0;
        for d in 0..dims {
            let lo = clamp(point[d] - steps[d], grid.ranges[d]);
            let hi = clamp(point[d] + steps[d], grid.ranges[d]);
            let mut trial = point.clone();
            let (t, v) = brent_min_closed(
                |t| {
                    trial[d] = t;
                    call(&trial, &mut evals)
                },
                lo,
                hi,
                grid.tol,
            );
            if v < value {
                let moved = (t - point[d]).abs();
                largest_move = largest_move.max(moved);
                point[d] = t;
                value = v;
                let at_edge = (t - lo).abs() <= 2.0 * grid.tol || (hi - t).abs() <= 2.0 * grid.tol;
                if !at_edge {
                    steps[d] = (4.0 * moved).clamp(20.0 * grid.tol, spacings[d]);
                }
            } else {
                steps[d] = (0.5 * steps[d]).max(20.0 * grid.tol);
            }
        }
        if largest_move <= grid.tol {
            break;
        }
    }
    let on_boundary = point
        .iter()
        .zip(&grid.ranges)
        .any(|(&t, &r)| t - r.0 <= 2.0 * grid.tol || r.1 - t <= 2.0 * grid.tol);
    Optimum { point, value, on_boundary, evaluations: evals }
}
