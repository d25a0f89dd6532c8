use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaos-stein"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_graph(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn triangle(dir: &Path) -> PathBuf {
    write_graph(dir, "triangle.txt", "3 3\n0 1\n1 2\n0 2\n")
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("missing field {key} in\n{text}"))
}

#[test]
fn help_and_bad_flags() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["bound", "--help"])), 0);
    assert_eq!(code(&run(&["bound", "--bogus"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["bound", "--family", "cycle", "--size", "3", "--n", "10", "--p", "1.5"])), 2);
    assert_eq!(code(&run(&["bound", "--family", "wheel", "--size", "5", "--n", "10", "--p", "0.5"])), 2);
}

#[test]
fn bound_triangle_sparse_branch() {
    let dir = TempDir::new().unwrap();
    let g = triangle(dir.path());
    let out = run(&["bound", "--graph", g.to_str().unwrap(), "--n", "1000", "--p", "0.001"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(field(&text, "regime"), "(np)^{-3/2}");
    assert_eq!(field(&text, "min_subgraph"), "v=3 e=3");
    assert!(field(&text, "beta").starts_with("1/1"));
    assert!(text.contains("normality: "));
}

#[test]
fn bound_k4_file_uses_profile_and_family_agrees() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(dir.path(), "k4.txt", "4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    let file = stdout(&run(&["bound", "--graph", g.to_str().unwrap(), "--n", "200", "--p", "0.05"]));
    let family = stdout(&run(&["bound", "--family", "complete", "--size", "4", "--n", "200", "--p", "0.05"]));
    assert_eq!(field(&file, "bound"), field(&family, "bound"));
    assert!(field(&file, "beta").starts_with("3/2"));
    assert!(!file.contains("closed_form"));
    let closed: f64 = field(&family, "closed_form").split(' ').next().unwrap().parse().unwrap();
    let general: f64 = field(&family, "bound").parse().unwrap();
    assert!((closed - general).abs() <= 1e-12 * general);
}

#[test]
fn malformed_and_isolated_graphs() {
    let dir = TempDir::new().unwrap();
    let bad = write_graph(dir.path(), "bad.txt", "3 2\n0 1\n");
    assert_eq!(code(&run(&["bound", "--graph", bad.to_str().unwrap(), "--n", "10", "--p", "0.5"])), 2);
    let iso = write_graph(dir.path(), "iso.txt", "4 3\n0 1\n1 2\n0 2\n");
    assert_eq!(code(&run(&["bound", "--graph", iso.to_str().unwrap(), "--n", "10", "--p", "0.5"])), 3);
    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&run(&["bound", "--graph", missing.to_str().unwrap(), "--n", "10", "--p", "0.5"])), 4);
}

#[test]
fn simulate_is_deterministic_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let plot = dir.path().join("a.plot");
    let base = ["simulate", "--family", "cycle", "--size", "3", "--n", "64", "--p", "0.1", "--reps", "20000", "--seed", "7"];
    let mut args: Vec<&str> = base.to_vec();
    args.extend(["--out", a.to_str().unwrap(), "--plot", plot.to_str().unwrap()]);
    assert_eq!(code(&run(&args)), 0);
    let mut args: Vec<&str> = base.to_vec();
    args.extend(["--out", b.to_str().unwrap(), "--threads", "1"]);
    assert_eq!(code(&run(&args)), 0);

    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rep,count,standardized"));
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0].parse::<usize>().unwrap(), i);
        cols[1].parse::<u64>().unwrap();
        let z: f64 = cols[2].parse().unwrap();
        assert_eq!(format!("{z:.16e}"), cols[2], "17-digit float must round-trip");
        rows += 1;
    }
    assert_eq!(rows, 20000);
    assert!(std::fs::read_to_string(&plot).unwrap().contains(a.to_str().unwrap()));
}

#[test]
fn missing_output_directory_is_io_error() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("no/such/dir/out.csv");
    let args = ["simulate", "--family", "cycle", "--size", "3", "--n", "20", "--p", "0.3", "--reps", "200", "--out", out.to_str().unwrap()];
    assert_eq!(code(&run(&args)), 4);
}

#[test]
fn scaling_writes_fit_row() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("scaling.csv");
    let args = [
        "scaling", "--family", "cycle", "--size", "3", "--alpha", "0.7", "--n-list", "16,32,64,128", "--reps", "2000",
        "--seed", "3", "--out", out.to_str().unwrap(),
    ];
    assert_eq!(code(&run(&args)), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,p,reps,dk_hat,dkw_radius,bound_parts_log,predicted_slope");
    assert_eq!(lines.len(), 6);
    let fit: Vec<&str> = lines[5].split(',').collect();
    assert_eq!(fit[0], "fit");
    let predicted: f64 = fit[6].parse().unwrap();
    assert!((predicted + 0.45).abs() < 1e-12);
    fit[3].parse::<f64>().unwrap();
}

#[test]
fn scaling_rejects_non_normal_exponent() {
    let args = ["scaling", "--family", "cycle", "--size", "3", "--alpha", "1.2", "--n-list", "16,32,64,128", "--reps", "200"];
    assert_eq!(code(&run(&args)), 2);
}

#[test]
fn verify_suites_pass() {
    let core = run(&["verify", "core", "--n", "10", "--p", "0.3", "--reps", "200", "--seed", "1"]);
    assert_eq!(code(&core), 0, "{}", stdout(&core));
    assert!(stdout(&core).contains("isometry"));
    let kernels = run(&["verify", "kernels", "--n", "8", "--p", "0.4", "--reps", "50"]);
    assert_eq!(code(&kernels), 0, "{}", stdout(&kernels));
    assert!(stdout(&kernels).contains("contraction bound l<k"));
    let graph = run(&["verify", "graph"]);
    assert_eq!(code(&graph), 0, "{}", stdout(&graph));
    assert_eq!(code(&run(&["verify", "nonsense"])), 2);
    assert_eq!(code(&run(&["verify", "core", "--n", "25"])), 2);
}

#[test]
fn verify_is_seed_deterministic() {
    let a = stdout(&run(&["verify", "kernels", "--n", "7", "--reps", "20", "--seed", "9"]));
    let b = stdout(&run(&["verify", "kernels", "--n", "7", "--reps", "20", "--seed", "9"]));
    assert_eq!(a, b);
}

fn parse_dump(text: &str) -> (Vec<(Vec<u32>, f64)>, f64) {
    let mut entries = Vec::new();
    let mut residual = f64::NAN;
    for line in text.lines() {
        let parts: Vec<&str> = line.split(' ').collect();
        if parts[0] == "residual" {
            residual = parts[1].parse().unwrap();
            continue;
        }
        let k: usize = parts[0].parse().unwrap();
        assert_eq!(parts.len(), k + 2, "line `{line}`");
        let tuple = parts[1..=k].iter().map(|s| s.parse().unwrap()).collect();
        entries.push((tuple, parts[k + 1].parse().unwrap()));
    }
    (entries, residual)
}

#[test]
fn decompose_triangle_reconstructs() {
    let dir = TempDir::new().unwrap();
    let g = triangle(dir.path());
    let out = run(&["decompose", "--graph", g.to_str().unwrap(), "--n", "4", "--p", "0.5"]);
    assert_eq!(code(&out), 0);
    let (entries, residual) = parse_dump(&stdout(&out));
    assert!(residual < 1e-9);
    // 6 edges, 12 edge pairs inside some triangle, 4 triangles.
    let per_order = |k: usize| entries.iter().filter(|(t, _)| t.len() == k).count();
    assert_eq!((per_order(1), per_order(2), per_order(3)), (6, 12, 4));
    for (t, _) in &entries {
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn decompose_edge_is_first_chaos() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(dir.path(), "edge.txt", "2 1\n0 1\n");
    let out = run(&["decompose", "--graph", g.to_str().unwrap(), "--n", "3", "--p", "0.3"]);
    assert_eq!(code(&out), 0);
    let (entries, residual) = parse_dump(&stdout(&out));
    assert!(residual < 1e-12);
    assert!(entries.iter().all(|(t, _)| t.len() <= 1));
    assert_eq!(entries.iter().filter(|(t, _)| t.len() == 1).count(), 3);
}

#[test]
fn decompose_over_cap_exits_5() {
    let dir = TempDir::new().unwrap();
    let g = triangle(dir.path());
    assert_eq!(code(&run(&["decompose", "--graph", g.to_str().unwrap(), "--n", "8", "--p", "0.5"])), 5);
}
