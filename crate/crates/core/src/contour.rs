//! Marching-squares level lines on a rectangular grid.

use std::collections::BTreeMap;

/// Grid edge: `H(i, j)` joins nodes (i, j)–(i+1, j), `V(i, j)` joins (i, j)–(i, j+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

pub type Polyline = Vec<(f64, f64)>;

/// Level lines of `values[i][j]`, sampled at (`xs[i]`, `ys[j]`).
///
/// Crossings are placed by linear interpolation along cell edges, in ln x
/// when `log_x` is set. Ambiguous saddle cells are resolved with the average
/// of the four corners. Cells with a NaN corner are skipped. A level outside
/// the data range gives no polylines.
pub fn extract(xs: &[f64], ys: &[f64], values: &[Vec<f64>], level: f64, log_x: bool) -> Vec<Polyline> {
    let nx = xs.len();
    let ny = ys.len();
    if nx < 2 || ny < 2 {
        return Vec::new();
    }
    let v = |i: usize, j: usize| values[i][j];
    let above = |i: usize, j: usize| v(i, j) >= level;

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            if corners.iter().any(|&(a, b)| v(a, b).is_nan()) {
                continue;
            }
            // Edges in corner order: bottom, right, top, left.
            let edges = [Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j)];
            let up: Vec<bool> = corners.iter().map(|&(a, b)| above(a, b)).collect();
            let crossing: Vec<usize> = (0..4).filter(|&e| up[e] != up[(e + 1) % 4]).collect();
            match crossing.len() {
                2 => segments.push((edges[crossing[0]], edges[crossing[1]])),
                4 => {
                    let mean = corners.iter().map(|&(a, b)| v(a, b)).sum::<f64>() / 4.0;
                    if (mean >= level) == up[0] {
                        // Corners 0 and 2 are connected through the centre;
                        // cut off corners 1 and 3.
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }

    let point = |e: Edge| -> (f64, f64) {
        let ((i0, j0), (i1, j1)) = match e {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (a, b) = (v(i0, j0), v(i1, j1));
        let t = if a == b { 0.5 } else { (level - a) / (b - a) };
        let x = if log_x {
            (xs[i0].ln() + t * (xs[i1].ln() - xs[i0].ln())).exp()
        } else {
            xs[i0] + t * (xs[i1] - xs[i0])
        };
        (x, ys[j0] + t * (ys[j1] - ys[j0]))
    };

    join(&segments).into_iter().map(|chain| chain.into_iter().map(point).collect()).collect()
}

/// Chain segments that share an edge into polylines; open chains first,
/// then closed loops, each started from its smallest edge for determinism.
fn join(segments: &[(Edge, Edge)]) -> Vec<Vec<Edge>> {
    let mut by_edge: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(k);
        by_edge.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    let walk = |start: Edge, used: &mut Vec<bool>| -> Option<Vec<Edge>> {
        let mut chain = vec![start];
        let mut at = start;
        loop {
            let next = by_edge[&at].iter().copied().find(|&k| !used[k]);
            let Some(k) = next else { break };
            used[k] = true;
            let (a, b) = segments[k];
            at = if a == at { b } else { a };
            chain.push(at);
            if at == start {
                break;
            }
        }
        (chain.len() > 1).then_some(chain)
    };

    let ends: Vec<Edge> = by_edge.iter().filter(|(_, s)| s.len() == 1).map(|(e, _)| *e).collect();
    for e in ends {
        if by_edge[&e].iter().any(|&k| !used[k]) {
            if let Some(c) = walk(e, &mut used) {
                out.push(c);
            }
        }
    }
    let all: Vec<Edge> = by_edge.keys().copied().collect();
    for e in all {
        if by_edge[&e].iter().any(|&k| !used[k]) {
            if let Some(c) = walk(e, &mut used) {
                out.push(c);
            }
        }
    }
    out
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// True if any segment of `p` properly crosses any segment of `q`.
pub fn polylines_cross(p: &[Polyline], q: &[Polyline]) -> bool {
    let segs = |ls: &[Polyline]| -> Vec<((f64, f64), (f64, f64))> {
        ls.iter().flat_map(|l| l.windows(2).map(|w| (w[0], w[1]))).collect()
    };
    let (sp, sq) = (segs(p), segs(q));
    sp.iter().any(|&(a, b)| {
        sq.iter().any(|&(c, d)| {
            let d1 = orient(a, b, c);
            let d2 = orient(a, b, d);
            let d3 = orient(c, d, a);
            let d4 = orient(c, d, b);
            d1 * d2 < 0.0 && d3 * d4 < 0.0
        })
    })
}

/// Distance from `pt` to the nearest segment of `lines`.
pub fn distance_to(lines: &[Polyline], pt: (f64, f64)) -> f64 {
    let seg = |a: (f64, f64), b: (f64, f64)| {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((pt.0 - a.0) * dx + (pt.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
        };
        ((a.0 + t * dx - pt.0).powi(2) + (a.1 + t * dy - pt.1).powi(2)).sqrt()
    };
    lines
        .iter()
        .flat_map(|l| {
            if l.len() == 1 {
                vec![seg(l[0], l[0])]
            } else {
                l.windows(2).map(|w| seg(w[0], w[1])).collect()
            }
        })
        .fold(f64::INFINITY, f64::min)
}
