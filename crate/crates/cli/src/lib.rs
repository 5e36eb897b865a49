//! Commands behind the `toric-ball` binary. Each command returns the text for
//! stdout and an exit code, or a [`CliError`] carrying its own code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use toric_ball::exact::pair_int;
use toric_ball::homeo::{param_boundary_point, phi_global, BaryPoint};
use toric_ball::verify::{self, VerifyConfig};
use toric_ball::{Atlas, Fan, FanError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;
pub const EXIT_FAILED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Read { .. } => EXIT_PARSE,
            Self::Fan(FanError::Parse(_)) => EXIT_PARSE,
            Self::Fan(FanError::Incomplete(_)) => EXIT_INCOMPLETE,
            Self::Fan(_) | Self::Usage(_) => EXIT_INVALID,
            Self::Write { .. } | Self::Internal(_) => EXIT_FAILED,
        }
    }
}

/// What a successful command prints, and the code it exits with.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self { code: EXIT_OK, stdout }
    }
}

pub fn read_fan(path: &Path) -> Result<Fan, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Fan::from_json(&text)?)
}

/// Reads a fan and requires it to be complete.
pub fn load_fan(path: &Path) -> Result<Fan, CliError> {
    let fan = read_fan(path)?;
    fan.is_complete().map_err(FanError::Incomplete)?;
    Ok(fan)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Sends a document to `out/name` when an output directory is given,
/// otherwise to stdout.
fn emit(doc: String, out: Option<&Path>, name: &str) -> Result<String, CliError> {
    match out {
        Some(dir) => {
            let path = dir.join(name);
            write_file(&path, &doc)?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(doc),
    }
}

pub fn validate(path: &Path) -> Result<Output, CliError> {
    let fan = read_fan(path)?;
    let cones = fan.num_cones();
    match fan.is_complete() {
        Ok(()) => Ok(Output::ok(format!("{cones} cones, complete\n"))),
        Err(v) => Ok(Output {
            code: EXIT_INCOMPLETE,
            stdout: format!("{cones} cones, incomplete: {v}\n"),
        }),
    }
}

fn rays_of(fan: &Fan, cone: usize) -> Vec<usize> {
    fan.cone(cone).rays.clone()
}

pub fn charts(path: &Path, out: Option<&Path>) -> Result<Output, CliError> {
    let fan = load_fan(path)?;
    let atlas = Atlas::new(&fan).map_err(|e| CliError::Internal(e.to_string()))?;
    let n = fan.dim();
    let charts: Vec<_> = atlas
        .charts()
        .iter()
        .map(|ch| {
            json!({
                "index": ch.index,
                "flag": ch.flag.ray_sets(&fan),
                "top": rays_of(&fan, ch.top),
                "barycenters": ch.barycenters,
                "alpha": &ch.generators[..n],
                "generators": ch.generators,
                "c": ch.c,
                "b": ch.b(),
                "psi": ch.psi.formulas(),
            })
        })
        .collect();
    let doc = to_json(&json!({
        "fan": fan.description(),
        "charts": charts,
    }));
    Ok(Output::ok(emit(doc, out, "charts.json")?))
}

/// Parses a comma- or whitespace-separated list of numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("not a number: {t:?}")))
        })
        .collect()
}

/// The face `τ` of the carrier whose orbit contains the point: the largest
/// face on which every generator with a positive value vanishes.
fn orbit_cone(fan: &Fan, carrier: usize, gens: &[Vec<i64>], values: &[f64]) -> usize {
    let positive: Vec<&Vec<i64>> = gens
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > 0.0)
        .map(|(g, _)| g)
        .collect();
    fan.faces(carrier)
        .iter()
        .copied()
        .filter(|&tau| {
            fan.cone(tau)
                .rays
                .iter()
                .all(|&r| positive.iter().all(|g| pair_int(g, &fan.rays()[r]) == 0))
        })
        .max_by_key(|&tau| (fan.cone(tau).dim, std::cmp::Reverse(tau)))
        .unwrap_or(fan.zero_cone())
}

pub fn param(path: &Path, flag: usize, xi: &[f64]) -> Result<Output, CliError> {
    let fan = load_fan(path)?;
    let atlas = Atlas::new(&fan).map_err(|e| CliError::Internal(e.to_string()))?;
    let count = atlas.charts().len();
    if flag >= count {
        return Err(CliError::Usage(format!(
            "flag index {flag} out of range (the fan has {count} maximal flags)"
        )));
    }
    let n = fan.dim();
    if xi.len() != n + 1 {
        return Err(CliError::Usage(format!(
            "expected {} barycentric coordinates, got {}",
            n + 1,
            xi.len()
        )));
    }
    let point = BaryPoint::new(xi.to_vec()).map_err(|e| CliError::Usage(e.to_string()))?;
    let p = param_boundary_point(&atlas, flag, &point)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let ch = atlas.chart(flag);
    let w = toric_ball::homeo::partial_sums(point.coords());
    let gens = &atlas.semigroup(p.carrier).elements;
    let orbit = orbit_cone(&fan, p.carrier, gens, &p.values);
    let doc = to_json(&json!({
        "flag": ch.flag.ray_sets(&fan),
        "xi": xi,
        "w": w,
        "chart_values": ch.psi_eval(&w),
        "carrier": rays_of(&fan, p.carrier),
        "orbit": rays_of(&fan, orbit),
        "generators": gens,
        "values": p.values,
        "tag": p.tag,
    }));
    Ok(Output::ok(doc))
}

pub fn verify(path: &Path, cfg: &VerifyConfig, out: Option<&Path>) -> Result<Output, CliError> {
    let fan = load_fan(path)?;
    let report = verify::run(&fan, cfg).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut stdout = emit(to_json(&report), out, "report.json")?;
    let code = if report.passed {
        EXIT_OK
    } else {
        for name in report.failing() {
            let _ = writeln!(stdout, "FAILED {name}");
        }
        EXIT_FAILED
    };
    Ok(Output { code, stdout })
}

/// A triangulated or polygonal surface.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<Vec<usize>>,
}

impl Mesh {
    pub fn to_off(&self) -> String {
        let mut s = String::from("OFF\n");
        let _ = writeln!(s, "{} {} 0", self.vertices.len(), self.faces.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:.9} {:.9} {:.9}", v[0], v[1], v[2]);
        }
        for f in &self.faces {
            let idx: Vec<String> = f.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "{} {}", f.len(), idx.join(" "));
        }
        s
    }
}

fn pad3(x: &[f64]) -> [f64; 3] {
    let mut v = [0.0; 3];
    v[..x.len()].copy_from_slice(x);
    v
}

/// Points of the unit circle (`n = 2`) or of a subdivided cube projected
/// radially onto the unit sphere (`n = 3`), with the faces between them.
fn unit_sphere(n: usize, res: usize) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    if n == 2 {
        let k = 8 * res;
        let pts = (0..k)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / k as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        return (pts, vec![(0..k).collect()]);
    }
    let mut index = std::collections::BTreeMap::new();
    let mut pts = Vec::new();
    let mut faces = Vec::new();
    let mut id = |g: [i64; 3], pts: &mut Vec<Vec<f64>>| -> usize {
        *index.entry(g).or_insert_with(|| {
            let v: Vec<f64> = g.iter().map(|&c| c as f64).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            pts.push(v.iter().map(|c| c / norm).collect());
            pts.len() - 1
        })
    };
    let r = res as i64;
    for axis in 0..3 {
        for sign in [-1i64, 1] {
            let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
            let at = |i: i64, j: i64| {
                let mut g = [0i64; 3];
                g[axis] = sign * r;
                g[a] = 2 * i - r;
                g[b] = 2 * j - r;
                g
            };
            for i in 0..r {
                for j in 0..r {
                    let q = [
                        id(at(i, j), &mut pts),
                        id(at(i + 1, j), &mut pts),
                        id(at(i + 1, j + 1), &mut pts),
                        id(at(i, j + 1), &mut pts),
                    ];
                    if sign > 0 {
                        faces.push(vec![q[0], q[1], q[2]]);
                        faces.push(vec![q[0], q[2], q[3]]);
                    } else {
                        faces.push(vec![q[0], q[2], q[1]]);
                        faces.push(vec![q[0], q[3], q[2]]);
                    }
                }
            }
        }
    }
    (pts, faces)
}

/// `Φ(S_r)` sampled at resolution `res`. Triangles are ordered by the maximal
/// cone containing their centroid, so the patches of each maximal cone are
/// contiguous.
pub fn level_set_mesh(atlas: &Atlas, r: f64, res: usize) -> Mesh {
    let fan = atlas.fan();
    let sub = atlas.subdivision();
    let n = fan.dim();
    let (pts, faces) = unit_sphere(n, res);
    let scaled: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| p.iter().map(|c| c * r).collect())
        .collect();
    let vertices = scaled
        .iter()
        .map(|x| pad3(&phi_global(sub, x, 1e-12).1))
        .collect();
    let mut keyed: Vec<(usize, usize, Vec<usize>)> = faces
        .into_iter()
        .enumerate()
        .map(|(k, f)| {
            let mut c = vec![0.0; n];
            for &v in &f {
                for (ci, xi) in c.iter_mut().zip(&scaled[v]) {
                    *ci += xi / f.len() as f64;
                }
            }
            let flag = sub.locate(&c, 1e-12).expect("complete fan");
            let top = sub.flags[flag].top().expect("maximal flag");
            (top, k, f)
        })
        .collect();
    keyed.sort_by_key(|(top, k, _)| (*top, *k));
    Mesh {
        vertices,
        faces: keyed.into_iter().map(|(_, _, f)| f).collect(),
    }
}

/// The boundary of the ball model with each cone `σ` placed at `B_σ`: one
/// facet per maximal flag.
pub fn limit_mesh(atlas: &Atlas) -> Mesh {
    let fan = atlas.fan();
    let vertices = (1..fan.num_cones())
        .map(|c| {
            let b: Vec<f64> = fan.barycenter(c).iter().map(|&x| x as f64).collect();
            pad3(&b)
        })
        .collect();
    let mut flags: Vec<(usize, Vec<usize>)> = atlas
        .subdivision()
        .flags
        .iter()
        .map(|f| {
            let top = f.top().expect("maximal flag");
            (top, f.cones().iter().map(|&c| c - 1).collect())
        })
        .collect();
    flags.sort();
    let mut faces: Vec<Vec<usize>> = flags.into_iter().map(|(_, f)| f).collect();
    if fan.dim() == 2 {
        // Chain the edges into one closed polygon.
        let mut order = vec![faces[0][0]];
        let mut used = vec![false; faces.len()];
        while order.len() < faces.len() {
            let last = *order.last().expect("nonempty");
            let next = faces
                .iter()
                .enumerate()
                .find(|(i, f)| !used[*i] && f.contains(&last))
                .map(|(i, f)| (i, if f[0] == last { f[1] } else { f[0] }));
            match next {
                Some((i, v)) => {
                    used[i] = true;
                    order.push(v);
                }
                None => break,
            }
        }
        faces = vec![order];
    } else {
        for f in &mut faces {
            orient(fan, f);
        }
    }
    Mesh { vertices, faces }
}

/// Orients a triangle of the limit model outward.
fn orient(fan: &Fan, f: &mut [usize]) {
    let p: Vec<[f64; 3]> = f
        .iter()
        .map(|&v| pad3(&fan.barycenter(v + 1).iter().map(|&x| x as f64).collect::<Vec<_>>()))
        .collect();
    let u = [p[1][0] - p[0][0], p[1][1] - p[0][1], p[1][2] - p[0][2]];
    let w = [p[2][0] - p[0][0], p[2][1] - p[0][1], p[2][2] - p[0][2]];
    let normal = [
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    ];
    let centroid: Vec<f64> = (0..3).map(|i| p.iter().map(|q| q[i]).sum::<f64>()).collect();
    if normal.iter().zip(&centroid).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
        f.swap(1, 2);
    }
}

fn radius_label(r: f64) -> String {
    format!("{r}").replace('-', "m")
}

pub fn mesh(path: &Path, radii: &[f64], res: usize, out: &Path) -> Result<Output, CliError> {
    let fan = load_fan(path)?;
    let n = fan.dim();
    if !(2..=3).contains(&n) {
        return Err(CliError::Usage(format!(
            "meshes are only produced in dimension 2 or 3, not {n}"
        )));
    }
    if res == 0 {
        return Err(CliError::Usage("resolution must be positive".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(CliError::Usage(format!("radius {r} is not positive")));
    }
    let atlas = Atlas::new(&fan).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut stdout = String::new();
    let mut files: Vec<(PathBuf, String)> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let name = format!("level_{i:02}_r{}.off", radius_label(r));
            (out.join(name), level_set_mesh(&atlas, r, res).to_off())
        })
        .collect();
    files.push((out.join("limit.off"), limit_mesh(&atlas).to_off()));
    for (p, text) in &files {
        write_file(p, text)?;
        let _ = writeln!(stdout, "wrote {}", p.display());
    }
    Ok(Output::ok(stdout))
}
