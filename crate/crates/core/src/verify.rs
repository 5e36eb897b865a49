//! The full check suite for a fan, with a serializable report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::bary::{cover_check, Flag, FlagCone};
use crate::charts::{exp_f, theta, Atlas, ChartError, DEFAULT_TOL};
use crate::complex::{verify_gluing, verify_regularity, BallModel, OrbitComplex};
use crate::cones::{dual_cone, polar_vrep};
use crate::exact::{rat, rat_frac, Rat};
use crate::fan::{Fan, FanDescription};
use crate::homeo::{
    nonextension_probe, param_boundary_point, partial_sums_exact, phi_flag,
    phi_flag_inverse, phi_on_cone, BaryPoint,
};

const MAX_COUNTEREXAMPLES: usize = 5;

/// Outcome of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub counterexamples: Vec<serde_json::Value>,
    #[serde(skip)]
    failures: usize,
}

impl Check {
    pub fn new(name: &str, tolerance: Option<f64>) -> Self {
        Self {
            name: name.to_string(),
            passed: true,
            count: 0,
            worst: None,
            tolerance,
            counterexamples: Vec::new(),
            failures: 0,
        }
    }

    pub fn absorb(&mut self, count: usize, worst: Option<f64>, bad: Vec<serde_json::Value>) {
        self.count += count;
        if let Some(w) = worst {
            self.worst = Some(self.worst.map_or(w, |v| v.max(w)));
        }
        self.failures += bad.len();
        for b in bad {
            if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
                self.counterexamples.push(b);
            }
        }
    }

    /// Records a residual against the tolerance.
    pub fn residual(&mut self, r: f64, payload: impl FnOnce() -> serde_json::Value) {
        let tol = self.tolerance.unwrap_or(0.0);
        let bad = if r <= tol { vec![] } else { vec![payload()] };
        self.absorb(1, Some(r), bad);
    }

    /// Records a boolean outcome.
    pub fn outcome(&mut self, ok: bool, payload: impl FnOnce() -> serde_json::Value) {
        let bad = if ok { vec![] } else { vec![payload()] };
        self.absorb(1, None, bad);
    }

    pub fn merge(&mut self, other: Check) {
        self.count += other.count;
        if let Some(w) = other.worst {
            self.worst = Some(self.worst.map_or(w, |v| v.max(w)));
        }
        self.failures += other.failures;
        let room = MAX_COUNTEREXAMPLES.saturating_sub(self.counterexamples.len());
        self.counterexamples.extend(other.counterexamples.into_iter().take(room));
    }

    pub fn failures(&self) -> usize {
        self.failures
    }

    pub fn finish(mut self) -> Self {
        self.passed = self.failures == 0;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    pub tol: f64,
    /// Samples per flag pair for the gluing checks.
    pub samples: usize,
    pub seed: u64,
    /// Shift one exponent of every chart before the chart checks.
    pub perturb_b: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            samples: 50,
            seed: 0,
            perturb_b: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub dim: usize,
    pub rays: usize,
    pub cones: usize,
    pub maximal_cones: usize,
    pub maximal_flags: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub fan: FanDescription,
    pub summary: Summary,
    pub config: VerifyConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_F491_4F6C_DD1D) ^ salt)
}

/// Nonnegative simplicial coordinates, some of them zero.
fn sample_u(rng: &mut ChaCha8Rng, k: usize, scale: f64) -> Vec<f64> {
    (0..k)
        .map(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random::<f64>() * scale
            }
        })
        .collect()
}

/// A point of `Δ_n` with exactly `zeros` leading zeros (the remaining
/// coordinates positive and sorted).
pub fn sample_delta(rng: &mut ChaCha8Rng, n: usize, zeros: usize) -> Vec<f64> {
    let mut tail: Vec<f64> = (zeros..n)
        .map(|_| rng.random_range(1e-3..=1.0f64))
        .collect();
    tail.sort_by(f64::total_cmp);
    let mut w = vec![0.0; zeros];
    w.extend(tail);
    w
}

fn fan_checks(fan: &Fan, cfg: &VerifyConfig) -> Vec<Check> {
    let mut out = Vec::new();

    let mut c = Check::new("fan.complete", None);
    let complete = fan.is_complete();
    c.outcome(complete.is_ok(), || json!(complete.as_ref().err().map(ToString::to_string)));
    out.push(c.finish());

    let mut c = Check::new("fan.euler_sum", None);
    let e = fan.euler_sum();
    c.outcome(e == 1, || json!({ "euler_sum": e }));
    out.push(c.finish());

    let mut c = Check::new("fan.faces_meet_in_faces", None);
    for a in 0..fan.num_cones() {
        for b in a..fan.num_cones() {
            let m = fan.intersect(a, b);
            c.outcome(fan.is_face(m, a) && fan.is_face(m, b), || json!([a, b]));
        }
    }
    out.push(c.finish());

    let mut c = Check::new("bary.cover", None);
    match cover_check(fan, 1000, cfg.seed) {
        Ok(k) => c.absorb(k, None, vec![]),
        Err(p) => c.absorb(1, None, vec![json!(p.iter().map(ToString::to_string).collect::<Vec<_>>())]),
    }
    out.push(c.finish());
    out
}

fn cone_checks(atlas: &Atlas) -> Vec<Check> {
    let fan = atlas.fan();
    type Outcome = (Option<serde_json::Value>, Option<serde_json::Value>);
    let per_cone: Vec<Outcome> = (0..fan.num_cones())
        .into_par_iter()
        .map(|s| {
            let d = dual_cone(fan, s);
            let back = polar_vrep(&d.generators(), fan.dim());
            let mut got = back.rays.clone();
            got.sort();
            let mut want = fan.cone(s).generators.clone();
            want.sort();
            let dual_ok = got == want && back.lineality.is_empty();
            let sg = atlas.semigroup(s);
            let gen = sg.certify_generation();
            let min = sg.certify_minimality();
            let hb_ok = gen.is_ok() && min.is_ok();
            let rays = &fan.cone(s).rays;
            (
                (!dual_ok).then(|| json!({"cone": rays})),
                (!hb_ok).then(|| json!({"cone": rays, "generation": gen.err(), "minimality": min.err()})),
            )
        })
        .collect();
    let mut dual = Check::new("cones.duality_involution", None);
    let mut hb = Check::new("cones.hilbert_basis_certified", None);
    for (d, h) in per_cone {
        dual.absorb(1, None, d.into_iter().collect());
        hb.absorb(1, None, h.into_iter().collect());
    }
    vec![dual.finish(), hb.finish()]
}

fn complex_checks(fan: &Fan) -> Vec<Check> {
    let n = fan.dim() as i64;
    let model = BallModel::build(fan);
    let mut c = Check::new("complex.ball_model", None);
    let chi = model.euler_characteristic();
    let chi_b = model.boundary_euler_characteristic();
    let want_b = if n == 0 { 0 } else { 1 + (-1i64).pow((n - 1) as u32) };
    c.outcome(chi == 1, || json!({ "euler": chi }));
    c.outcome(chi_b == want_b, || json!({ "boundary_euler": chi_b, "expected": want_b }));
    let flags = crate::bary::enumerate_flags(fan, true).len();
    c.outcome(model.maximal().len() == flags, || {
        json!({ "top_simplices": model.maximal().len(), "maximal_flags": flags })
    });
    let top_bdry = model.boundary_counts().get(fan.dim().saturating_sub(1)).copied().unwrap_or(0);
    c.outcome(n == 0 || top_bdry == flags, || json!({ "boundary_top": top_bdry }));
    c.outcome(model.is_closed(), || json!("not closed under faces"));
    out_push_pm(&mut c, &model);
    let mut o = Check::new("complex.orbit_complex", None);
    let oc = OrbitComplex::build(fan);
    let chi_o = oc.euler_characteristic();
    o.outcome(chi_o == 1, || json!({ "euler": chi_o }));
    o.outcome(oc.top_cells() == 1, || json!({ "top_cells": oc.top_cells() }));
    o.outcome(oc.is_graded_poset(), || json!("incidence is not a graded poset"));
    vec![c.finish(), o.finish()]
}

fn out_push_pm(c: &mut Check, model: &BallModel) {
    let pm = model.pseudomanifold_check();
    c.outcome(pm.passed, || json!({ "pseudomanifold": pm.violations }));
}

fn chart_checks(atlas: &Atlas, cfg: &VerifyConfig) -> Vec<Check> {
    let charts: Vec<_> = atlas
        .charts()
        .iter()
        .map(|ch| {
            if cfg.perturb_b {
                let n = ch.n();
                ch.perturbed(0, n - 1, 1)
            } else {
                ch.clone()
            }
        })
        .collect();
    let tol = cfg.tol;
    let results: Vec<[Check; 4]> = charts
        .par_iter()
        .map(|ch| {
            let n = ch.n();
            let mut rng = rng_for(cfg.seed, 1 + ch.index as u64);
            let mut inv = Check::new("charts.invariants", None);
            let r = ch.check_invariants();
            inv.outcome(r.is_ok(), || json!({ "chart": ch.index, "error": r.err().map(|e| e.to_string()) }));

            let mut comm = Check::new("charts.commutativity", Some(tol));
            for _ in 0..100 {
                let u = sample_u(&mut rng, n, 3.0);
                let r = ch.commutativity_residual(&u).unwrap_or(f64::INFINITY);
                comm.residual(r, || json!({ "chart": ch.index, "u": u }));
            }

            let mut roundtrip = Check::new("charts.psi_inversion", Some(1e-10));
            let mut ws: Vec<Vec<f64>> = Vec::with_capacity(500);
            for z in 1..=n {
                for _ in 0..50 {
                    ws.push(sample_delta(&mut rng, n, z));
                }
            }
            while ws.len() < 500 {
                ws.push(sample_delta(&mut rng, n, 0));
            }
            for w in &ws {
                let y = ch.psi_eval(w);
                let err = match ch.psi_invert(&y, tol) {
                    Ok(back) => back
                        .coords()
                        .iter()
                        .zip(w)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max),
                    Err(_) => f64::INFINITY,
                };
                roundtrip.residual(err, || json!({ "chart": ch.index, "w": w }));
            }

            let mut law = Check::new("charts.semigroup_law", Some(tol));
            let sg = atlas.semigroup(ch.top);
            for _ in 0..50 {
                let zeros = rng.random_range(0..=n);
                let w = sample_delta(&mut rng, n, zeros);
                let p = ch.toric_point(&ch.psi_eval(&w), "law");
                let r = p.relation_residual(sg);
                law.residual(r, || json!({ "chart": ch.index, "w": w }));
            }
            [inv, comm, roundtrip, law]
        })
        .collect();
    merge(results)
}

fn merge<const K: usize>(results: Vec<[Check; K]>) -> Vec<Check> {
    let mut acc: Option<[Check; K]> = None;
    for r in results {
        match &mut acc {
            None => acc = Some(r),
            Some(a) => {
                for (x, y) in a.iter_mut().zip(r) {
                    x.merge(y);
                }
            }
        }
    }
    acc.map(|a| a.into_iter().map(Check::finish).collect())
        .unwrap_or_default()
}

fn homeo_checks(atlas: &Atlas, cfg: &VerifyConfig) -> Vec<Check> {
    let fan = atlas.fan();
    let n = fan.dim();
    let mut rng = rng_for(cfg.seed, 0xF1);
    let mut out = Vec::new();

    let mut rt = Check::new("homeo.phi_roundtrip", Some(1e-10));
    for k in 1..=n {
        for _ in 0..1000 {
            let u = sample_u(&mut rng, k, 10.0);
            let back = phi_flag_inverse(&phi_flag(&u));
            let err = back.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            rt.residual(err, || json!({ "u": u }));
        }
    }
    out.push(rt.finish());

    let mut sub = Check::new("homeo.phi_subflag_gluing", Some(1e-12));
    let subdivision = atlas.subdivision();
    for (flag, cone) in subdivision.flags.iter().zip(&subdivision.cones) {
        for mask in 1u32..(1 << n) {
            let members: Vec<usize> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| flag.cones()[i])
                .collect();
            let sub_flag = Flag::new(fan, members).expect("subflag of a flag");
            let sub_cone = FlagCone::new(fan, &sub_flag).expect("subflag cone");
            for _ in 0..5 {
                let u = sample_u(&mut rng, sub_flag.len(), 10.0);
                let x = sub_cone.point_f64(&u);
                let direct = sub_cone.point_f64(&phi_flag(&u));
                let via = phi_on_cone(cone, &x, 1e-12);
                let err = match via {
                    Ok(y) => y.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
                    Err(_) => f64::INFINITY,
                };
                sub.residual(err, || json!({ "flag": flag.cones(), "subflag": sub_flag.cones(), "u": u }));
            }
        }
    }
    out.push(sub.finish());

    let mut glob = Check::new("homeo.phi_global_agreement", Some(1e-12));
    for x in crate::bary::cover_samples(fan, 200, cfg.seed) {
        let xf: Vec<f64> = x.iter().map(crate::exact::rat_to_f64).collect();
        let images: Vec<Vec<f64>> = subdivision
            .cones
            .iter()
            .filter(|c| c.contains(&x))
            .map(|c| phi_on_cone(c, &xf, 1e-12).expect("exact member"))
            .collect();
        let err = images
            .iter()
            .flat_map(|a| images.iter().map(move |b| (a, b)))
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(p, q)| (p - q).abs())
                    .fold(0.0, f64::max)
            })
            .fold(if images.is_empty() { f64::INFINITY } else { 0.0 }, f64::max);
        glob.residual(err, || json!({ "x": xf }));
    }
    out.push(glob.finish());

    let mut comp = Check::new("homeo.barycentric_composite", Some(cfg.tol));
    for (ci, ch) in atlas.charts().iter().enumerate() {
        for _ in 0..20 {
            let u = sample_u(&mut rng, n, 5.0);
            let xi = BaryPoint::from_simplicial(&u);
            let p = param_boundary_point(atlas, ci, &xi).expect("valid chart");
            let w = theta(&exp_f(&phi_flag(&xi.to_simplicial().expect("interior"))));
            let q = ch.toric_point(&ch.psi_eval(&w), "composite");
            let err = p
                .values
                .iter()
                .zip(&q.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            comp.residual(err, || json!({ "chart": ci, "u": u }));
        }
    }
    out.push(comp.finish());

    let mut mono = Check::new("homeo.partial_sums_in_delta", None);
    for _ in 0..200 {
        let raw: Vec<i64> = (0..=n).map(|_| rng.random_range(0..6)).collect();
        let total: i64 = raw.iter().sum::<i64>().max(1);
        let xi: Vec<Rat> = if raw.iter().all(|&x| x == 0) {
            let mut v = vec![rat(0); n + 1];
            v[0] = rat(1);
            v
        } else {
            raw.iter().map(|&x| rat_frac(x, total)).collect()
        };
        let w = partial_sums_exact(&xi);
        let ok = w.first().is_none_or(|x| *x >= rat(0))
            && w.windows(2).all(|p| p[0] <= p[1])
            && w.last().is_none_or(|x| *x <= rat(1));
        mono.outcome(ok, || json!({ "xi": raw }));
    }
    out.push(mono.finish());

    if n >= 2 {
        let mut probe = Check::new("homeo.nonextension_path_dependence", None);
        let a = nonextension_probe(n, 1.0, 40.0).expect("n ≥ 2");
        let b = nonextension_probe(n, 2.0, 40.0).expect("n ≥ 2");
        let ratio = a[1] / b[1];
        probe.outcome(ratio > 2.0 && a[0] < 1e-50 && b[0] < 1e-50, || {
            json!({ "c1": a, "c2": b })
        });
        out.push(probe.finish());
    }
    out
}

/// Runs every check on a validated fan.
pub fn run(fan: &Fan, cfg: &VerifyConfig) -> Result<Report, ChartError> {
    let atlas = Atlas::new(fan)?;
    let mut checks = fan_checks(fan, cfg);
    checks.extend(cone_checks(&atlas));
    checks.extend(complex_checks(fan));
    checks.extend(chart_checks(&atlas, cfg));
    checks.extend(homeo_checks(&atlas, cfg));
    let (shared, distinct) = verify_gluing(&atlas, cfg.samples, cfg.tol, cfg.seed);
    checks.push(shared);
    checks.push(distinct);
    checks.push(verify_regularity(fan));
    let passed = checks.iter().all(|c| c.passed);
    Ok(Report {
        fan: fan.description(),
        summary: Summary {
            dim: fan.dim(),
            rays: fan.rays().len(),
            cones: fan.num_cones(),
            maximal_cones: fan.maximal().len(),
            maximal_flags: atlas.charts().len(),
            complete: fan.is_complete().is_ok(),
        },
        config: cfg.clone(),
        passed,
        checks,
    })
}
