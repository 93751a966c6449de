use std::collections::BTreeMap;

use clap::ValueEnum;
use pesinlab::birkhoff::{
    birkhoff_average, conditional_fubini_check, ergodic_components, ergodicity_test, recurrence_statistics, Direction,
    PartitionDescriptor, TestSet,
};
use pesinlab::cocycle::{
    dominated_splitting_check, empirical_pesin_constant, lyapunov_spectrum, oseledets_directions, tempering_report,
    Branch, BundleField,
};
use pesinlab::dynamics::{
    cosine_family, default_family, torus_reduce, DynamicalSystem, Kind, Observable, SystemDescriptor, TorusPoint,
};
use pesinlab::homoclinic::{
    ehc_membership, homoclinic_relation, homoclinic_witness_at, nonwandering_probe, periodic_points,
    spectral_decomposition_report, PeriodicPointRecord, SpectralOptions,
};
use pesinlab::manifolds::{
    global_manifold_window, holonomy_jacobian, leaf_direction, local_manifold, pesin_rate_membership, Sign,
    Transversal, Window, DEFAULT_POINT_BUDGET,
};
use pesinlab::rng::member_rng;
use pesinlab::LabError;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::params::Params;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Lyapunov,
    Oseledets,
    PesinBlock,
    Dominated,
    Birkhoff,
    ErgodicTest,
    Components,
    Recurrence,
    Fubini,
    Manifold,
    Holonomy,
    Periodic,
    Homoclinic,
    Ehc,
    Spectral,
    NwProbe,
    Export,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

/// Failures while running a command, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad parameters (exit 2).
    Validation(String),
    /// A module operation failed (exit 1).
    Computation(LabError),
    /// `export` matched nothing (exit 3).
    NoMatch(String),
    Io(anyhow::Error),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::InvalidInput(m) => Failure::Validation(m),
            other => Failure::Computation(other),
        }
    }
}

fn bad<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Validation(msg.into()))
}

/// Resolves parameters against their defaults and remembers what was used.
pub struct Ctx {
    given: serde_json::Map<String, Value>,
    pub resolved: BTreeMap<String, Value>,
}

impl Ctx {
    pub fn new(p: &Params) -> Self {
        let given = match p.snapshot() {
            Value::Object(m) => m,
            _ => unreachable!("params serialise to an object"),
        };
        Ctx { given, resolved: BTreeMap::new() }
    }

    pub fn get<T: Serialize + DeserializeOwned>(&mut self, key: &str, default: T) -> Result<T, Failure> {
        let v = match self.given.get(key) {
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| Failure::Validation(format!("--{key}: {e}")))?,
            None => default,
        };
        self.resolved.insert(key.to_string(), serde_json::to_value(&v).expect("serialisable"));
        Ok(v)
    }

    pub fn opt<T: Serialize + DeserializeOwned>(&mut self, key: &str) -> Result<Option<T>, Failure> {
        match self.given.get(key) {
            Some(_) => self.get(key, None),
            None => Ok(None),
        }
    }

    /// Keys that were supplied but never read by the command.
    pub fn unused(&self) -> Vec<String> {
        self.given.keys().filter(|k| !self.resolved.contains_key(*k)).cloned().collect()
    }
}

fn system(ctx: &mut Ctx) -> Result<DynamicalSystem, Failure> {
    let name: String = ctx.get("system", "cat".to_string())?;
    let matrix: Option<Vec<i64>> = ctx.opt("matrix")?;
    let matrix = match matrix {
        None => None,
        Some(m) if m.len() == 4 => Some(vec![m[0..2].to_vec(), m[2..4].to_vec()]),
        Some(_) => return bad("--matrix takes four integers"),
    };
    Ok(SystemDescriptor { system: name, matrix }.build()?)
}

fn point_of(sys: &DynamicalSystem, c: &[f64], what: &str) -> Result<TorusPoint, Failure> {
    if c.len() != sys.dim() {
        return bad(format!("{what} needs {} coordinates, got {}", sys.dim(), c.len()));
    }
    Ok(sys.canonical(&torus_reduce(c)?))
}

fn pair(c: &[f64], what: &str) -> Result<[f64; 2], Failure> {
    match c {
        [a, b] => Ok([*a, *b]),
        _ => bad(format!("{what} needs 2 coordinates")),
    }
}

/// `--point`, or a point drawn from the seed.
fn base_point(ctx: &mut Ctx, sys: &DynamicalSystem, seed: u64) -> Result<TorusPoint, Failure> {
    let x = match ctx.opt::<Vec<f64>>("point")? {
        Some(c) => point_of(sys, &c, "--point")?,
        None => sys.sample(&mut member_rng(seed, 0)),
    };
    ctx.resolved.insert("point".into(), json!(x.coords()));
    Ok(x)
}

fn sign(ctx: &mut Ctx) -> Result<Sign, Failure> {
    Ok(ctx.get("sign", "+".to_string())?.parse()?)
}

fn family(ctx: &mut Ctx, sys: &DynamicalSystem) -> Result<Vec<Observable>, Failure> {
    match ctx.get("family", "cosine".to_string())?.as_str() {
        "cosine" => Ok(cosine_family(sys.space())),
        "default" => Ok(default_family(sys.space())),
        other => bad(format!("unknown family '{other}' (expected cosine or default)")),
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialise")
}

/// Runs one module command. Returns the seed used and the result payload.
pub fn run(command: Command, ctx: &mut Ctx) -> Result<(String, u64, Value), Failure> {
    let sys = system(ctx)?;
    let seed: u64 = ctx.get("seed", 0)?;
    let result = match command {
        Command::Lyapunov => {
            let x = base_point(ctx, &sys, seed)?;
            let n = ctx.get("steps", 10_000u64)?;
            let every = ctx.get("renorm", 1u64)?;
            to_json(&lyapunov_spectrum(&sys, &x, n, every)?)
        }
        Command::Oseledets => {
            let x = base_point(ctx, &sys, seed)?;
            let n = ctx.get("steps", 200u64)?;
            to_json(&oseledets_directions(&sys, &x, n)?)
        }
        Command::PesinBlock => {
            let x = base_point(ctx, &sys, seed)?;
            let n = ctx.get("steps", 200u64)?;
            let eps = ctx.get("eps", 0.1)?;
            let window = ctx.get("window", 100u64)?;
            let bound = ctx.get("bound", 10.0)?;
            let t = ctx.get("tempering", 0u64)?;
            let split = oseledets_directions(&sys, &x, n)?;
            let estimate = empirical_pesin_constant(&sys, &x, eps, window, &split, bound)?;
            let tempering = if t > 0 { Some(tempering_report(&sys, &x, eps, window, t, bound)?) } else { None };
            json!({ "estimate": estimate, "tempering": tempering })
        }
        Command::Dominated => {
            let x = base_point(ctx, &sys, seed)?;
            let n = ctx.get("steps", 100u64)?;
            let e = bundle(&ctx.get("bundle-e", "stable".to_string())?)?;
            let f = bundle(&ctx.get("bundle-f", "unstable".to_string())?)?;
            to_json(&dominated_splitting_check(&sys, &x, &e, &f, n)?)
        }
        Command::Birkhoff => {
            let x = base_point(ctx, &sys, seed)?;
            let n = ctx.get("steps", 100_000u64)?;
            let mut k = vec![0i64; sys.dim()];
            k[0] = 1;
            let freq = ctx.get("freq", k)?;
            let kind = match ctx.get("kind", "cosine".to_string())?.as_str() {
                "cosine" | "cos" => Kind::Cosine,
                "sine" | "sin" => Kind::Sine,
                other => return bad(format!("unknown observable kind '{other}'")),
            };
            let direction = match ctx.get("direction", "forward".to_string())?.as_str() {
                "forward" => Direction::Forward,
                "backward" => Direction::Backward,
                other => return bad(format!("unknown direction '{other}'")),
            };
            let phi = Observable::new(freq, kind, sys.space())?;
            to_json(&birkhoff_average(&sys, &phi, &x, n, direction)?)
        }
        Command::ErgodicTest => {
            let fam = family(ctx, &sys)?;
            let e = ctx.get("ensemble", 100usize)?;
            let n = ctx.get("steps", 100_000u64)?;
            let tol = ctx.get("tolerance", 0.05)?;
            to_json(&ergodicity_test(&sys, &fam, e, n, tol, seed)?)
        }
        Command::Components => {
            let fam = family(ctx, &sys)?;
            let e = ctx.get("ensemble", 200usize)?;
            let n = ctx.get("steps", 100_000u64)?;
            let rho = ctx.get("linking-radius", 0.1)?;
            to_json(&ergodic_components(&sys, &fam, e, n, rho, seed)?)
        }
        Command::Recurrence => {
            let c = ctx.get("center", vec![0.3; sys.dim()])?;
            let center = point_of(&sys, &c, "--center")?;
            let r = ctx.get("radius", 0.05)?;
            let e = ctx.get("ensemble", 1000usize)?;
            let horizon = ctx.get("horizon", 10_000u64)?;
            to_json(&recurrence_statistics(&sys, &center, r, e, horizon, seed)?)
        }
        Command::Fubini => {
            let partition = match ctx.get("partition", "vertical".to_string())?.as_str() {
                "vertical" => PartitionDescriptor::VerticalCircles,
                "unstable" => PartitionDescriptor::UnstableSegments {
                    corner: pair(&ctx.get("segment-corner", vec![0.0, 0.0])?, "--segment-corner")?,
                    size: ctx.get("segment-size", 0.5)?,
                    length: ctx.get("segment-length", 0.1)?,
                },
                other => return bad(format!("unknown partition '{other}' (expected vertical or unstable)")),
            };
            let test_set = match ctx.opt::<f64>("test-radius")? {
                Some(radius) => TestSet::Disc { center: pair(&ctx.get("center", vec![0.3, 0.3])?, "--center")?, radius },
                None => TestSet::Rectangle {
                    lo: pair(&ctx.get("test-lo", vec![0.0, 0.0])?, "--test-lo")?,
                    hi: pair(&ctx.get("test-hi", vec![0.5, 0.5])?, "--test-hi")?,
                },
            };
            let samples = ctx.get("samples", 1_000_000u64)?;
            to_json(&conditional_fubini_check(&sys, &partition, &test_set, samples, seed)?)
        }
        Command::Manifold => manifold(ctx, &sys)?,
        Command::Holonomy => {
            let sign = sign(ctx)?;
            let across = leaf_direction(&sys, &TorusPoint::origin(2), sign.reversed())?;
            let from_base = pair(&ctx.get("from-base", vec![0.3, 0.2])?, "--from-base")?;
            let from_dir = pair(&ctx.get("from-dir", across.to_vec())?, "--from-dir")?;
            let to_base = pair(&ctx.get("to-base", vec![0.35, 0.23090169943749475])?, "--to-base")?;
            let to_dir = pair(&ctx.get("to-dir", across.to_vec())?, "--to-dir")?;
            let half = ctx.get("half-length", 0.05)?;
            let samples = ctx.get("steps", 200u64)? as usize;
            let k = ctx.get("density-bound", 10.0)?;
            let resolution = half / samples as f64;
            let from = Transversal::new(&sys, from_base, from_dir, half, resolution, sign)?;
            let to = Transversal::new(&sys, to_base, to_dir, half, resolution, sign)?;
            to_json(&holonomy_jacobian(&sys, &from, &to, sign, samples, k)?)
        }
        Command::Periodic => {
            let a = torus_block(&sys)?;
            let n = ctx.get("period", 1u64)?;
            to_json(&periodic_points(a, n)?)
        }
        Command::Homoclinic => {
            let a = torus_block(&sys)?;
            let p = pair(&ctx.get("p", vec![0.0, 0.0])?, "--p")?;
            let q = pair(&ctx.get("q", p.to_vec())?, "--q")?;
            let (p, q) = (torus_reduce(&p)?, torus_reduce(&q)?);
            match ctx.opt::<Vec<i64>>("translate")? {
                Some(t) if t.len() == 2 => to_json(&homoclinic_witness_at(a, &p, &q, [t[0], t[1]])?),
                Some(_) => return bad("--translate takes two integers"),
                None => {
                    let w = ctx.get("translate-window", pesinlab::homoclinic::DEFAULT_TRANSLATE_WINDOW)?;
                    to_json(&homoclinic_relation(a, &p, &q, w)?)
                }
            }
        }
        Command::Ehc => {
            let anchor = anchor_record(ctx, &sys)?;
            let x = base_point(ctx, &sys, seed)?;
            let w = ctx.get("translate-window", 2i64)?;
            let n = ctx.get("steps", 10u64)?;
            to_json(&ehc_membership(&sys, &anchor, &x, w, n)?)
        }
        Command::Spectral => {
            let fam = family(ctx, &sys)?;
            let d = SpectralOptions::default();
            let opts = SpectralOptions {
                ensemble: ctx.get("ensemble", d.ensemble)?,
                n: ctx.get("steps", d.n)?,
                max_period: ctx.get("max-period", d.max_period)?,
                linking_radius: ctx.get("linking-radius", d.linking_radius)?,
                seed,
                translate_window: ctx.get("translate-window", d.translate_window)?,
                ehc_steps: d.ehc_steps,
            };
            to_json(&spectral_decomposition_report(&sys, &fam, &opts)?)
        }
        Command::NwProbe => {
            let res = ctx.get("resolution", 32usize)?;
            let horizon = ctx.get("horizon", 50u64)?;
            let sps = ctx.get("samples-per-side", pesinlab::homoclinic::DEFAULT_SAMPLES_PER_SIDE)?;
            // cells of the sphere are probed on the covering torus
            to_json(&nonwandering_probe(&sys.lift_system(), res, horizon, sps)?)
        }
        Command::Export => unreachable!("export is not a module command"),
    };
    Ok((sys.name().to_string(), seed, result))
}

fn bundle(spec: &str) -> Result<BundleField, Failure> {
    match spec {
        "stable" => Ok(BundleField::Estimated(Branch::Stable)),
        "unstable" => Ok(BundleField::Estimated(Branch::Unstable)),
        "center" | "centre" => Ok(BundleField::Estimated(Branch::Center)),
        vectors => {
            // one or more vectors separated by ';', components by ','
            let parsed: Result<Vec<Vec<f64>>, _> = vectors
                .split(';')
                .map(|v| v.split(',').map(|c| c.trim().parse::<f64>()).collect())
                .collect();
            match parsed {
                Ok(vs) => Ok(BundleField::Constant(vs)),
                Err(_) => bad(format!("bundle '{spec}' is neither a branch name nor a list of vectors")),
            }
        }
    }
}

fn torus_block(sys: &DynamicalSystem) -> Result<&pesinlab::dynamics::IntMatrix, Failure> {
    if sys.dim() != 2 {
        return bad(format!("{} is not a 2x2 automorphism; periodic points and witnesses need one", sys.name()));
    }
    Ok(sys.matrix())
}

fn anchor_record(ctx: &mut Ctx, sys: &DynamicalSystem) -> Result<PeriodicPointRecord, Failure> {
    let a = torus_block(sys)?;
    let period = ctx.get("period", 1u64)?;
    let p = pair(&ctx.get("p", vec![0.0, 0.0])?, "--p")?;
    let p = torus_reduce(&p)?;
    periodic_points(a, period)?
        .into_iter()
        .find(|r| r.to_point().distance(&p) < 1e-9)
        .ok_or_else(|| Failure::Validation(format!("{:?} is not a point of period {period}", p.coords())))
}

fn manifold(ctx: &mut Ctx, sys: &DynamicalSystem) -> Result<Value, Failure> {
    if let Some(y) = ctx.opt::<Vec<f64>>("target")? {
        let x = base_point(ctx, sys, 0)?;
        let y = point_of(sys, &y, "--target")?;
        let n = ctx.get("steps", 60u64)?;
        return Ok(to_json(&pesin_rate_membership(sys, &x, &y, n)?));
    }
    let p = point_of(sys, &ctx.get("point", vec![0.0; sys.dim()])?, "--point")?;
    let sign = sign(ctx)?;
    let eps = ctx.get("eps", 0.1)?;
    let steps = ctx.get("steps", 4u64)?;
    let lo = ctx.opt::<Vec<f64>>("window-lo")?;
    let hi = ctx.opt::<Vec<f64>>("window-hi")?;
    match (lo, hi) {
        (None, None) => {
            let delta = ctx.get("delta", 0.1)?;
            Ok(to_json(&local_manifold(sys, &p, sign, delta, eps, steps)?))
        }
        (Some(lo), Some(hi)) => {
            let window = Window { lo: pair(&lo, "--window-lo")?, hi: pair(&hi, "--window-hi")? };
            Ok(to_json(&global_manifold_window(sys, &p, sign, eps, window, steps, DEFAULT_POINT_BUDGET)?))
        }
        _ => bad("--window-lo and --window-hi go together"),
    }
}
