use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::series::{check_observable, orbit_averages};
use crate::dynamics::{DynamicalSystem, Observable, TorusPoint};
use crate::error::{invalid, Result};
use crate::rng::member_rng;

pub const MIN_ENSEMBLE: usize = 10;
pub const MIN_COMPONENT_ENSEMBLE: usize = 50;

/// Ensemble member `i`: its start point and forward Birkhoff vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffVector {
    pub start: TorusPoint,
    pub averages: Vec<f64>,
}

/// Starts are drawn from per-member streams, so the result does not depend
/// on how rayon schedules the members.
pub fn ensemble_birkhoff_vectors(
    sys: &DynamicalSystem,
    family: &[Observable],
    ensemble: usize,
    n: u64,
    seed: u64,
) -> Result<Vec<BirkhoffVector>> {
    if family.is_empty() {
        return invalid("observable family is empty");
    }
    if n == 0 {
        return invalid("N must be at least 1");
    }
    for phi in family {
        check_observable(sys, phi)?;
    }
    sys.check_horizon(n as i64)?;
    Ok((0..ensemble as u64)
        .into_par_iter()
        .map(|i| {
            let start = sys.sample(&mut member_rng(seed, i));
            let averages = orbit_averages(sys, family, &start, n);
            BirkhoffVector { start, averages }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSummary {
    pub observable: String,
    pub freq: Vec<i64>,
    pub space_average: f64,
    pub ensemble_mean: f64,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    ErgodicConsistent,
    NonErgodic { witness: String, witness_freq: Vec<i64>, deviation: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicReport {
    pub system: String,
    pub ensemble: usize,
    pub n: u64,
    pub seed: u64,
    pub tolerance: f64,
    pub observables: Vec<ObservableSummary>,
    pub verdict: Verdict,
}

impl ErgodicReport {
    pub fn is_ergodic_consistent(&self) -> bool {
        self.verdict == Verdict::ErgodicConsistent
    }
}

/// Ensemble form of the Birkhoff criterion: every observable's forward
/// average should match its space average at every sampled start.
pub fn ergodicity_test(
    sys: &DynamicalSystem,
    family: &[Observable],
    ensemble: usize,
    n: u64,
    tolerance: f64,
    seed: u64,
) -> Result<ErgodicReport> {
    if ensemble < MIN_ENSEMBLE {
        return invalid(format!("ensemble size must be at least {MIN_ENSEMBLE}"));
    }
    if !(tolerance > 0.0) {
        return invalid("tolerance must be positive");
    }
    let vectors = ensemble_birkhoff_vectors(sys, family, ensemble, n, seed)?;
    let observables: Vec<ObservableSummary> = family
        .iter()
        .enumerate()
        .map(|(j, phi)| {
            let avg = phi.space_average();
            let mean = vectors.iter().map(|v| v.averages[j]).sum::<f64>() / ensemble as f64;
            let max_deviation = vectors.iter().map(|v| (v.averages[j] - avg).abs()).fold(0.0, f64::max);
            ObservableSummary {
                observable: phi.id(),
                freq: phi.freq().to_vec(),
                space_average: avg,
                ensemble_mean: mean,
                max_deviation,
            }
        })
        .collect();
    // first observable attaining the largest deviation
    let worst = observables
        .iter()
        .fold(None::<&ObservableSummary>, |best, o| match best {
            Some(b) if b.max_deviation >= o.max_deviation => Some(b),
            _ => Some(o),
        })
        .expect("family is nonempty");
    let verdict = if worst.max_deviation > tolerance {
        Verdict::NonErgodic {
            witness: worst.observable.clone(),
            witness_freq: worst.freq.clone(),
            deviation: worst.max_deviation,
        }
    } else {
        Verdict::ErgodicConsistent
    };
    Ok(ErgodicReport { system: sys.name().to_string(), ensemble, n, seed, tolerance, observables, verdict })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Birkhoff vector of the lowest-index member.
    pub representative: Vec<f64>,
    pub representative_index: usize,
    pub mass: f64,
    pub members: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub ensemble: usize,
    pub linking_radius: f64,
    pub clusters: Vec<Cluster>,
    /// Cluster index of each input vector.
    pub labels: Vec<usize>,
    /// False when there are more than `√E` clusters, which suggests a
    /// continuum of components.
    pub discrete: bool,
}

/// Single-linkage clustering of Birkhoff vectors at radius `ρ` in the max-norm.
pub fn cluster_components(vectors: &[Vec<f64>], radius: f64) -> Result<ComponentReport> {
    if vectors.is_empty() {
        return invalid("no vectors to cluster");
    }
    if !(radius >= 0.0) {
        return invalid("linking radius must be nonnegative");
    }
    let e = vectors.len();
    let mut parent: Vec<usize> = (0..e).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..e {
        for j in i + 1..e {
            let d = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if d <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    // keep the smaller index as root so roots are representatives
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut counts = vec![0usize; e];
    let roots: Vec<usize> = (0..e).map(|i| find(&mut parent, i)).collect();
    for &r in &roots {
        counts[r] += 1;
    }
    let clusters: Vec<Cluster> = (0..e)
        .filter(|&i| counts[i] > 0)
        .map(|i| Cluster {
            representative: vectors[i].clone(),
            representative_index: i,
            mass: counts[i] as f64 / e as f64,
            members: counts[i],
        })
        .collect();
    let labels = roots.iter().map(|r| clusters.iter().position(|c| c.representative_index == *r).unwrap_or(0)).collect();
    let discrete = (clusters.len() as f64) <= (e as f64).sqrt();
    Ok(ComponentReport { ensemble: e, linking_radius: radius, clusters, labels, discrete })
}

pub fn ergodic_components(
    sys: &DynamicalSystem,
    family: &[Observable],
    ensemble: usize,
    n: u64,
    radius: f64,
    seed: u64,
) -> Result<ComponentReport> {
    if ensemble < MIN_COMPONENT_ENSEMBLE {
        return invalid(format!("ensemble size must be at least {MIN_COMPONENT_ENSEMBLE}"));
    }
    let vectors = ensemble_birkhoff_vectors(sys, family, ensemble, n, seed)?;
    let v: Vec<Vec<f64>> = vectors.into_iter().map(|b| b.averages).collect();
    cluster_components(&v, radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{cosine_family, Space};

    #[test]
    fn identical_points_form_one_cluster() {
        let v = vec![vec![0.1, 0.2]; 60];
        let r = cluster_components(&v, 0.0).unwrap();
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].mass, 1.0);
        assert!(r.discrete);
    }

    #[test]
    fn chained_points_link() {
        let v: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.05]).collect();
        assert_eq!(cluster_components(&v, 0.06).unwrap().clusters.len(), 1);
        let r = cluster_components(&v, 0.04).unwrap();
        assert_eq!(r.clusters.len(), 10);
        assert!(!r.discrete);
        assert!((r.clusters.iter().map(|c| c.mass).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_ensembles_rejected() {
        let cat = DynamicalSystem::cat();
        let fam = cosine_family(Space::T2);
        assert!(ergodicity_test(&cat, &fam, 5, 100, 0.05, 1).is_err());
        assert!(ergodicity_test(&cat, &[], 20, 100, 0.05, 1).is_err());
        assert!(ergodic_components(&cat, &fam, 20, 100, 0.1, 1).is_err());
    }

    #[test]
    fn product_map_is_flagged_with_the_circle_witness() {
        let s = DynamicalSystem::cat_x_id();
        let r = ergodicity_test(&s, &cosine_family(Space::T3), 20, 2000, 0.05, 3).unwrap();
        match r.verdict {
            Verdict::NonErgodic { witness_freq, deviation, .. } => {
                assert_eq!(witness_freq, vec![0, 0, 1]);
                assert!(deviation > 0.05);
            }
            v => panic!("{v:?}"),
        }
    }
}
