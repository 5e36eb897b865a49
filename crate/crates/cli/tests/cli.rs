use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use toric_ball::bundled;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_toric-ball"))
}

fn fan_file(dir: &Path, name: &str) -> PathBuf {
    let p = dir.join(format!("{name}.json"));
    std::fs::write(&p, bundled::source(name).unwrap()).unwrap();
    p
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().unwrap();
    (
        status.code().unwrap(),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn json(s: &str) -> serde_json::Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(bin().arg("validate").arg(fan_file(dir.path(), "p2")));
    assert_eq!((code, out.trim()), (0, "7 cones, complete"));

    let (code, _, _) = run(bin().arg("validate").arg(fan_file(dir.path(), "quadrant")));
    assert_eq!(code, 3);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dim\": 2, \"rays\": [[1, 0]").unwrap();
    assert_eq!(run(bin().arg("validate").arg(&bad)).0, 1);

    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"dim": 1, "rays": [[1]], "max_cones": [[0]], "extra": 1}"#).unwrap();
    assert_eq!(run(bin().arg("validate").arg(&unknown)).0, 1);

    assert_eq!(run(bin().arg("validate").arg(dir.path().join("missing.json"))).0, 1);

    let not_primitive = dir.path().join("np.json");
    std::fs::write(&not_primitive, r#"{"dim": 1, "rays": [[2], [-1]], "max_cones": [[0], [1]]}"#).unwrap();
    assert_eq!(run(bin().arg("validate").arg(&not_primitive)).0, 2);

    let overlap = dir.path().join("overlap.json");
    std::fs::write(
        &overlap,
        r#"{"dim": 2, "rays": [[1, 0], [0, 1], [1, 1]], "max_cones": [[0, 1], [0, 2]]}"#,
    )
    .unwrap();
    assert_eq!(run(bin().arg("validate").arg(&overlap)).0, 2);
}

#[test]
fn charts_dump() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(bin().arg("charts").arg(fan_file(dir.path(), "p1")));
    assert_eq!(code, 0);
    let doc = json(&out);
    let charts = doc["charts"].as_array().unwrap();
    assert_eq!(charts.len(), 2);
    for ch in charts {
        assert_eq!(ch["b"], json("[[1]]"));
    }

    let (_, out, _) = run(bin().arg("charts").arg(fan_file(dir.path(), "p2")));
    let doc = json(&out);
    let charts = doc["charts"].as_array().unwrap();
    assert_eq!(charts.len(), 6);
    let ch = charts
        .iter()
        .find(|c| c["flag"] == json("[[0], [0, 1]]"))
        .unwrap();
    let b = &ch["b"];
    assert_eq!(b[0][0], 1);
    assert_eq!(b[1][1], 1);
    assert_eq!(b[1][0], 0);

    let (_, out, _) = run(bin().arg("charts").arg(fan_file(dir.path(), "p1xp1")));
    let doc = json(&out);
    let charts = doc["charts"].as_array().unwrap();
    assert_eq!(charts.len(), 8);
    for ch in charts {
        for i in 0..2 {
            assert_eq!(ch["b"][i][i], 1);
            for j in 0..i {
                assert_eq!(ch["b"][i][j], 0);
            }
        }
    }

    let out_dir = dir.path().join("out");
    let (code, _, _) = run(bin()
        .arg("charts")
        .arg(fan_file(dir.path(), "p2"))
        .arg("--out")
        .arg(&out_dir));
    assert_eq!(code, 0);
    assert!(out_dir.join("charts.json").exists());

    let (code, _, _) = run(bin().arg("charts").arg(fan_file(dir.path(), "quadrant")));
    assert_eq!(code, 3);
}

fn param(file: &Path, flag: usize, xi: &str) -> (i32, serde_json::Value) {
    let (code, out, _) = run(bin()
        .arg("param")
        .arg(file)
        .args(["--flag", &flag.to_string(), "--xi", xi]));
    (code, if code == 0 { json(&out) } else { serde_json::Value::Null })
}

#[test]
fn param_points() {
    let dir = tempfile::tempdir().unwrap();
    let p2 = fan_file(dir.path(), "p2");

    let (code, doc) = param(&p2, 0, "1,0,0");
    assert_eq!(code, 0);
    assert!(doc["values"].as_array().unwrap().iter().all(|v| v == 1.0));
    assert_eq!(doc["orbit"], json("[]"));

    let third = 1.0 / 3.0;
    let (code, doc) = param(&p2, 2, &format!("{third},{third},{}", 1.0 - 2.0 * third));
    assert_eq!(code, 0);
    let w: Vec<f64> = serde_json::from_value(doc["w"].clone()).unwrap();
    assert!(w.windows(2).all(|p| p[0] < p[1]));

    let (code, doc) = param(&p2, 1, "0,0,1");
    assert_eq!(code, 0);
    assert!(doc["values"].as_array().unwrap().iter().all(|v| v == 0.0));
    assert_eq!(doc["orbit"], doc["carrier"]);

    let p112 = fan_file(dir.path(), "p112");
    for flag in 0..6 {
        let (code, doc) = param(&p112, flag, "0.2,0.3,0.5");
        assert_eq!(code, 0);
        assert!(!doc["carrier"].as_array().unwrap().is_empty());
    }

    assert_eq!(param(&p2, 0, "0.5,0.6,0").0, 2);
    assert_eq!(param(&p2, 0, "0.5,0.5").0, 2);
    assert_eq!(param(&p2, 0, "-0.1,0.6,0.5").0, 2);
    assert_eq!(param(&p2, 0, "a,b,c").0, 2);
    assert_eq!(param(&p2, 6, "1,0,0").0, 2);
}

#[test]
fn verify_exit_codes_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["p2", "p1xp1", "p112"] {
        let file = fan_file(dir.path(), name);
        let (code, out, _) = run(bin().arg("verify").arg(&file).args(["--seed", "7"]));
        assert_eq!(code, 0, "{name}");
        let (_, again, _) = run(bin().arg("verify").arg(&file).args(["--seed", "7"]));
        assert_eq!(out, again, "{name}: reports differ between runs");
        assert_eq!(json(&out)["passed"], true);
    }

    let file = fan_file(dir.path(), "p2");
    let out_dir = dir.path().join("rep");
    let (code, stdout, _) = run(bin()
        .arg("verify")
        .arg(&file)
        .arg("--perturb-b")
        .arg("--out")
        .arg(&out_dir));
    assert_eq!(code, 4);
    assert!(stdout.contains("FAILED charts.commutativity"));
    let report = json(&std::fs::read_to_string(out_dir.join("report.json")).unwrap());
    assert_eq!(report["passed"], false);

    assert_eq!(run(bin().arg("verify").arg(fan_file(dir.path(), "quadrant"))).0, 3);
    assert_ne!(run(bin().arg("verify").arg(&file).args(["--tol", "0"])).0, 0);
}

fn read_off(path: &Path) -> (Vec<[f64; 3]>, Vec<Vec<usize>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("OFF"));
    let counts: Vec<usize> = lines
        .next()
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    let verts = (0..counts[0])
        .map(|_| {
            let v: Vec<f64> = lines
                .next()
                .unwrap()
                .split_whitespace()
                .map(|t| t.parse().unwrap())
                .collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    let faces = (0..counts[1])
        .map(|_| {
            let f: Vec<usize> = lines
                .next()
                .unwrap()
                .split_whitespace()
                .map(|t| t.parse().unwrap())
                .collect();
            assert_eq!(f[0], f.len() - 1);
            f[1..].to_vec()
        })
        .collect();
    (verts, faces)
}

fn norm(v: &[f64; 3]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[test]
fn mesh_export() {
    let dir = tempfile::tempdir().unwrap();
    let cube = fan_file(dir.path(), "p1_cubed");
    let out = dir.path().join("mesh");
    let (code, _, _) = run(bin()
        .arg("mesh")
        .arg(&cube)
        .args(["--radii", "0.01,1000", "--res", "4", "--out"])
        .arg(&out));
    assert_eq!(code, 0);

    // Near the origin Φ is x/2π up to second order.
    let (verts, faces) = read_off(&out.join("level_00_r0.01.off"));
    let target = 0.01 / (2.0 * std::f64::consts::PI);
    assert!(verts.iter().all(|v| (norm(v) / target - 1.0).abs() < 0.02));
    let edges: std::collections::BTreeSet<(usize, usize)> = faces
        .iter()
        .flat_map(|f| (0..3).map(move |i| (f[i].min(f[(i + 1) % 3]), f[i].max(f[(i + 1) % 3]))))
        .collect();
    assert_eq!(verts.len() as i64 - edges.len() as i64 + faces.len() as i64, 2);

    // Far out each vertex is dominated by the ray of its flag: six patches,
    // one around each ±e_i.
    let (verts, _) = read_off(&out.join("level_01_r1000.off"));
    let mut patches = std::collections::BTreeSet::new();
    for v in &verts {
        let (i, m) = (0..3)
            .map(|i| (i, v[i].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        patches.insert((i, v[i] > 0.0));
        assert!(m > 0.0);
    }
    assert_eq!(patches.len(), 6);

    // The limit model is the barycentric subdivision of the cube surface.
    let (verts, faces) = read_off(&out.join("limit.off"));
    assert_eq!((verts.len(), faces.len()), (26, 48));

    let again = dir.path().join("again");
    run(bin()
        .arg("mesh")
        .arg(&cube)
        .args(["--radii", "0.01,1000", "--res", "4", "--out"])
        .arg(&again));
    for name in ["level_00_r0.01.off", "level_01_r1000.off", "limit.off"] {
        assert_eq!(
            std::fs::read(out.join(name)).unwrap(),
            std::fs::read(again.join(name)).unwrap()
        );
    }

    let p2 = fan_file(dir.path(), "p2");
    let out2 = dir.path().join("p2");
    let (code, _, _) = run(bin().arg("mesh").arg(&p2).args(["--radii", "3"]).arg("--out").arg(&out2));
    assert_eq!(code, 0);
    let (verts, faces) = read_off(&out2.join("limit.off"));
    assert_eq!((verts.len(), faces.len(), faces[0].len()), (6, 1, 6));
    let (_, faces) = read_off(&out2.join("level_00_r3.off"));
    assert_eq!(faces.len(), 1);

    let (code, _, _) = run(bin()
        .arg("mesh")
        .arg(fan_file(dir.path(), "p1"))
        .args(["--radii", "1", "--out"])
        .arg(dir.path().join("p1")));
    assert_eq!(code, 2);
    let p1_4 = dir.path().join("p1_4.json");
    let rays: Vec<Vec<i64>> = (0..8)
        .map(|k| (0..4).map(|i| if i == k / 2 { 1 - 2 * (k % 2) as i64 } else { 0 }).collect())
        .collect();
    let cones: Vec<Vec<usize>> = (0..16usize)
        .map(|m| (0..4).map(|i| 2 * i + (m >> i & 1)).collect())
        .collect();
    let doc = serde_json::json!({ "dim": 4, "rays": rays, "max_cones": cones });
    std::fs::write(&p1_4, doc.to_string()).unwrap();
    assert_eq!(run(bin().arg("validate").arg(&p1_4)).0, 0);
    let (code, _, _) = run(bin()
        .arg("mesh")
        .arg(&p1_4)
        .args(["--radii", "1", "--out"])
        .arg(dir.path().join("p1_4")));
    assert_eq!(code, 2);
}
