use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::periodic::{periodic_points, Fraction, PeriodicPointRecord};
use super::witness::ehc_membership;
use crate::birkhoff::{cluster_components, ensemble_birkhoff_vectors};
use crate::cocycle::oseledets_directions;
use crate::dynamics::{DynamicalSystem, Observable, Space};
use crate::error::{invalid, LabError, Result};

/// How far past `max_period` to look for a regular anchor when every
/// anchor up to `max_period` is a cone point of the sphere quotient.
pub const SUBSTITUTE_SEARCH: u64 = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub ensemble: usize,
    pub n: u64,
    pub max_period: u64,
    pub linking_radius: f64,
    pub seed: u64,
    pub translate_window: i64,
    /// Pushes of the local leaf used for the anchor's global manifolds.
    pub ehc_steps: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            ensemble: 200,
            n: 100_000,
            max_period: 1,
            linking_radius: 0.1,
            seed: 0,
            translate_window: 2,
            ehc_steps: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorSummary {
    pub record: PeriodicPointRecord,
    /// Period in the system's own space; on the sphere quotient `Aᵐx ≡ ±x`
    /// already closes the orbit.
    pub cycle: u64,
    /// True when the anchor replaced cone-point anchors of lower period.
    pub substituted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub mass: f64,
    pub members: usize,
    pub representative: Vec<f64>,
    /// Index into `anchors` of the class most members were assigned to.
    pub anchor: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub system: String,
    pub options: SpectralOptions,
    pub anchors: Vec<AnchorSummary>,
    pub skipped_singular: Vec<[Fraction; 2]>,
    pub components: Vec<ComponentSummary>,
    pub discrete: bool,
    /// Share of sampled points with zipped dims `(k, 0, d - k)`.
    pub nuh_fraction: f64,
    /// Share of sampled Nuh points assigned to some `Ehc(p)`.
    pub coverage: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

fn cycle_length(sys: &DynamicalSystem, record: &PeriodicPointRecord) -> u64 {
    if sys.space() != Space::S2 {
        return record.period;
    }
    let pts = record.orbit_points();
    (1..record.period as usize)
        .find(|&m| sys.distance(&pts[m], &pts[0]) < 1e-12)
        .map_or(record.period, |m| m as u64)
}

/// Anchors of the lowest periods, lexicographic within a period, skipping
/// cone points of the sphere quotient.
fn select_anchors(sys: &DynamicalSystem, max_period: u64) -> Result<(Vec<AnchorSummary>, Vec<[Fraction; 2]>)> {
    let mut anchors = Vec::new();
    let mut skipped = Vec::new();
    let mut period = 1;
    while period <= max_period || (anchors.is_empty() && period <= max_period + SUBSTITUTE_SEARCH) {
        let substituted = period > max_period;
        for r in periodic_points(sys.matrix(), period)? {
            if r.period != period || !r.hyperbolic {
                continue;
            }
            if sys.is_singular(&r.to_point()) {
                skipped.push(r.point);
                continue;
            }
            // one representative per orbit (the lexicographically first point)
            if r.orbit.iter().any(|o| *o < r.point) {
                continue;
            }
            if sys.space() == Space::S2 {
                let neg = r.to_point().negated();
                if anchors.iter().any(|a: &AnchorSummary| a.record.orbit_points().iter().any(|o| o.distance(&neg) < 1e-12)) {
                    continue;
                }
            }
            anchors.push(AnchorSummary { cycle: cycle_length(sys, &r), record: r, substituted });
            if substituted {
                break;
            }
        }
        period += 1;
    }
    Ok((anchors, skipped))
}

/// Clusters ensemble Birkhoff vectors into numerical ergodic components and
/// assigns sampled points to ergodic homoclinic classes of periodic anchors.
pub fn spectral_decomposition_report(
    sys: &DynamicalSystem,
    family: &[Observable],
    opts: &SpectralOptions,
) -> Result<DecompositionReport> {
    if opts.max_period == 0 {
        return invalid("max period must be at least 1");
    }
    let vectors = ensemble_birkhoff_vectors(sys, family, opts.ensemble, opts.n, opts.seed)?;
    let clusters = cluster_components(&vectors.iter().map(|v| v.averages.clone()).collect::<Vec<_>>(), opts.linking_radius)?;
    let e = vectors.len() as f64;

    let hyperbolic = sys.hyperbolic_matrix().is_some();
    let (anchors, skipped) = if hyperbolic { select_anchors(sys, opts.max_period)? } else { (vec![], vec![]) };
    if hyperbolic && anchors.is_empty() {
        return Err(LabError::NoAnchors(format!("no regular hyperbolic periodic point of period <= {}", opts.max_period)));
    }

    // per member: (in Nuh, assigned anchor)
    let assignments: Vec<(bool, Option<usize>)> = vectors
        .par_iter()
        .map(|v| {
            if !hyperbolic {
                let nuh = oseledets_directions(sys, &v.start, 64).is_ok_and(|s| s.dims.is_hyperbolic());
                return (nuh, None);
            }
            let mut nuh = false;
            for (i, a) in anchors.iter().enumerate() {
                match ehc_membership(sys, &a.record, &v.start, opts.translate_window, opts.ehc_steps) {
                    Ok(m) => {
                        nuh = m.dims.is_hyperbolic();
                        if m.in_ehc {
                            return (nuh, Some(i));
                        }
                    }
                    Err(_) => return (false, None),
                }
            }
            (nuh, None)
        })
        .collect();
    let nuh_count = assignments.iter().filter(|a| a.0).count();
    let assigned = assignments.iter().filter(|a| a.0 && a.1.is_some()).count();

    let components = clusters
        .clusters
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let mut votes = vec![0usize; anchors.len()];
            for (label, a) in clusters.labels.iter().zip(&assignments) {
                if let (true, Some(k)) = (*label == ci, a.1) {
                    votes[k] += 1;
                }
            }
            // ties go to the lower anchor index
            let anchor = votes
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .max_by(|(i, n), (j, m)| n.cmp(m).then(j.cmp(i)))
                .map(|(i, _)| i);
            ComponentSummary { mass: c.mass, members: c.members, representative: c.representative.clone(), anchor }
        })
        .collect();

    let diagnostic = (!hyperbolic).then(|| {
        format!(
            "no hyperbolic anchor: {} has a centre eigenvalue of modulus 1, so it has no hyperbolic periodic points and m(Nuh) = 0",
            sys.name()
        )
    });
    Ok(DecompositionReport {
        system: sys.name().to_string(),
        options: opts.clone(),
        anchors,
        skipped_singular: skipped,
        components,
        discrete: clusters.discrete,
        nuh_fraction: nuh_count as f64 / e,
        coverage: if nuh_count > 0 { assigned as f64 / nuh_count as f64 } else { 0.0 },
        diagnostic,
    })
}
