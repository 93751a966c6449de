use serde::{Deserialize, Serialize};

use super::local::{dist, hyperbolic_anchor, local_manifold, ManifoldSegment, Sign, RESOLUTION};
use crate::dynamics::{DynamicalSystem, TorusPoint};
use crate::error::{invalid, Result};

/// Default cap on the total number of stored polyline vertices.
pub const DEFAULT_POINT_BUDGET: usize = 5_000_000;

/// An axis-parallel rectangle inside the fundamental domain `[0, 1]²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Window {
    pub fn unit() -> Self {
        Window { lo: [0.0, 0.0], hi: [1.0, 1.0] }
    }

    pub fn validate(&self) -> Result<()> {
        if (0..2).all(|i| 0.0 <= self.lo[i] && self.lo[i] < self.hi[i] && self.hi[i] <= 1.0) {
            Ok(())
        } else {
            invalid("window must be a nonempty rectangle inside [0,1]^2")
        }
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        (0..2).all(|i| self.lo[i] <= p[i] && p[i] <= self.hi[i])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalManifold {
    pub window: Window,
    pub sign: Sign,
    /// Strands of `f^{±kq}(W^±_ε(p))` clipped to the window, for the last `k` computed.
    pub strands: Vec<ManifoldSegment>,
    /// Strand count after each of `k = 0, 1, …`.
    pub strand_counts: Vec<usize>,
    pub truncated: bool,
}

/// The union `⋃_{k ≤ n} f^{±kq}(W^±_ε(p))`, clipped into a window of the
/// fundamental domain. The local leaves are nested, so the union is the
/// last image.
pub fn global_manifold_window(
    sys: &DynamicalSystem,
    p: &TorusPoint,
    sign: Sign,
    eps: f64,
    window: Window,
    n: u64,
    point_budget: usize,
) -> Result<GlobalManifold> {
    window.validate()?;
    let (q, _) = hyperbolic_anchor(sys, &sys.canonical(p))?;
    sys.check_horizon((n * q) as i64)?;
    let local = local_manifold(sys, p, sign, eps, eps, 0)?;
    let anchor = local.anchor;
    // displacements of the two endpoints; the image of a straight segment
    // under the linear lift stays straight
    let mut ends = [local.points[0], local.points[local.points.len() - 1]]
        .map(|x| [x[0] - anchor[0], x[1] - anchor[1]]);

    let mut strands = clip(anchor, &ends, sign, &window, point_budget).unwrap_or_default();
    let mut counts = vec![strands.len()];
    let mut truncated = false;
    for _ in 0..n {
        for e in ends.iter_mut() {
            let mut v = e.to_vec();
            for _ in 0..q {
                v = sys.displacement_step(&TorusPoint::origin(2), &v, sign == Sign::Minus);
            }
            *e = [v[0], v[1]];
        }
        match clip(anchor, &ends, sign, &window, point_budget) {
            Some(s) => {
                counts.push(s.len());
                strands = s;
            }
            None => {
                truncated = true;
                break;
            }
        }
    }
    Ok(GlobalManifold { window, sign, strands, strand_counts: counts, truncated })
}

/// Cuts the lifted segment `anchor + [ends[0], ends[1]]` at every integer
/// translate of the window boundary, keeps the pieces inside, and resamples
/// them. `None` when the vertex budget would be exceeded.
fn clip(anchor: [f64; 2], ends: &[[f64; 2]; 2], sign: Sign, window: &Window, budget: usize) -> Option<Vec<ManifoldSegment>> {
    let a = [anchor[0] + ends[0][0], anchor[1] + ends[0][1]];
    let b = [anchor[0] + ends[1][0], anchor[1] + ends[1][1]];
    let total = dist(&a, &b);
    if total / RESOLUTION > budget as f64 {
        return None;
    }
    let d = [b[0] - a[0], b[1] - a[1]];
    let mut cuts = vec![0.0, 1.0];
    for i in 0..2 {
        if d[i] == 0.0 {
            continue;
        }
        let (lo, hi) = (a[i].min(b[i]), a[i].max(b[i]));
        for level in [0.0, window.lo[i], window.hi[i]] {
            let mut k = (lo - level).ceil();
            while k + level <= hi {
                let t = (k + level - a[i]) / d[i];
                if t > 0.0 && t < 1.0 {
                    cuts.push(t);
                }
                k += 1.0;
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let anchor_t = if ends[0] == [0.0, 0.0] {
        0.0
    } else {
        // parameter of the anchor along the chord, if it lies on it
        let t = -(ends[0][0] * d[0] + ends[0][1] * d[1]) / (d[0] * d[0] + d[1] * d[1]);
        t.clamp(0.0, 1.0)
    };
    let mut strands = Vec::new();
    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if (t1 - t0) * total < 1e-15 {
            continue;
        }
        let m = [a[0] + 0.5 * (t0 + t1) * d[0], a[1] + 0.5 * (t0 + t1) * d[1]];
        let cell = [m[0].floor(), m[1].floor()];
        let local = [m[0] - cell[0], m[1] - cell[1]];
        if !window.contains(local) {
            continue;
        }
        let at = |t: f64| [a[0] + t * d[0] - cell[0], a[1] + t * d[1] - cell[1]];
        let len = (t1 - t0) * total;
        let count = (len / RESOLUTION).ceil().max(1.0) as usize;
        let points: Vec<[f64; 2]> = (0..=count).map(|j| at(t0 + (t1 - t0) * j as f64 / count as f64)).collect();
        let anchor_index = (t0..=t1).contains(&anchor_t).then(|| (((anchor_t - t0) / (t1 - t0)) * count as f64).round() as usize);
        strands.push(ManifoldSegment::new(anchor, sign, points, anchor_index));
    }
    Some(strands)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strand_growth_rate() {
        let cat = DynamicalSystem::cat();
        let g = global_manifold_window(&cat, &TorusPoint::origin(2), Sign::Plus, 0.1, Window::unit(), 5, DEFAULT_POINT_BUDGET)
            .unwrap();
        assert!(!g.truncated);
        assert_eq!(g.strand_counts.len(), 6);
        let c = &g.strand_counts;
        let ratio = c[5] as f64 / c[4] as f64;
        assert!((2.4..=2.9).contains(&ratio), "{c:?}");
        for s in &g.strands {
            let d = s.direction();
            assert!((d[1] / d[0] - 0.6180339887498949).abs() < 1e-9);
            assert!(s.points.iter().all(|p| p.iter().all(|c| (-1e-12..=1.0 + 1e-12).contains(c))));
        }
        let total: f64 = g.strands.iter().map(|s| s.length()).sum();
        assert!((total - 0.2 * 2.618033988749895f64.powi(5)).abs() < 1e-9);
    }

    #[test]
    fn zero_steps_is_the_local_segment() {
        let cat = DynamicalSystem::cat();
        let g = global_manifold_window(&cat, &TorusPoint::origin(2), Sign::Plus, 0.1, Window::unit(), 0, DEFAULT_POINT_BUDGET)
            .unwrap();
        let total: f64 = g.strands.iter().map(|s| s.length()).sum();
        assert!((total - 0.2).abs() < 1e-12);
    }

    #[test]
    fn budget_truncates() {
        let cat = DynamicalSystem::cat();
        let g = global_manifold_window(&cat, &TorusPoint::origin(2), Sign::Minus, 0.1, Window::unit(), 30, 100_000).unwrap();
        assert!(g.truncated);
        assert!(g.strand_counts.len() < 31);
    }
}
