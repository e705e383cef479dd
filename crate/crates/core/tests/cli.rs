use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_specbisect"));
    c.env_remove("SPECBISECT_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn eigh_from_file_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.txt");
    std::fs::write(&input, "3 3 1\n0 0 2 0\n0 1 1 0\n1 1 2 0\n2 2 -1 0\n").unwrap();
    let (u, d, s) = (dir.path().join("u.txt"), dir.path().join("d.txt"), dir.path().join("s.json"));
    let o = run(&[
        "eigh",
        "--input",
        input.to_str().unwrap(),
        "--eps",
        "1e-8",
        "--out-u",
        u.to_str().unwrap(),
        "--out-d",
        d.to_str().unwrap(),
        "--stats",
        s.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (dm, _) = specbisect::primitives::io::read_matrix(&d).unwrap();
    let mut vals: Vec<f64> = (0..3).map(|i| dm.get(i, 0).to_f64().0).collect();
    vals.sort_by(f64::total_cmp);
    for (got, want) in vals.iter().zip([-1.0, 1.0, 3.0]) {
        assert!((got - want).abs() < 1e-7, "{vals:?}");
    }
    assert!(Path::new(&u).exists());
    let stats: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&s).unwrap()).unwrap();
    assert_eq!(stats["run_config"]["command"]["eigh"]["eps"], 1e-8);
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    let o = bin()
        .env("SPECBISECT_SEED", "77")
        .args(["eigh", "--gue", "4", "--stats", s.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&s).unwrap()).unwrap();
    assert_eq!(v["run_config"]["seed"], 77);
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for k in 0..2 {
        let u = dir.path().join(format!("u{k}.txt"));
        let o = run(&["eigh", "--gue", "7", "--seed", "5", "--out-u", u.to_str().unwrap()]);
        assert!(o.status.success());
        outs.push(std::fs::read(&u).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn raster_pgm_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let pgm = dir.path().join("r.pgm");
    let o = run(&["raster", "--scheme", "newton", "--grid", "20", "--out", pgm.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("claims hold: true"));
    assert!(std::fs::read(&pgm).unwrap().starts_with(b"P5\n20 20\n255\n"));
    let csv = dir.path().join("r.csv");
    let o = run(&["raster", "--grid", "5", "--xmin", "-1", "--xmax", "1", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 26);
}

#[test]
fn other_subcommands() {
    let o = run(&["lower-bound"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("bound met = true"));

    let o = run(&["precision-report", "--eps", "1e-15", "--n", "4000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("necessary    54"));
    assert!(text.contains("92"));

    let o = run(&["bench", "--sizes", "4,8", "--eps", "1e-4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 3);

    let o = run(&["sign", "--gue", "6", "--eps", "1e-8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("iterations"));

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.txt");
    std::fs::write(&p, "3 3 1\n0 0 1 0\n1 1 1 0\n").unwrap();
    let o = run(&["deflate", "--input", p.to_str().unwrap(), "--rank", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("3 x 2"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["eigh", "--input", "/nonexistent/a.txt"]).status.code(), Some(4));
    assert_eq!(run(&["eigh", "--gue", "3", "--eps", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["deflate", "--gue", "3", "--rank", "3"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("c.conf");
    std::fs::write(&conf, "n = 64\neps = 1e-6\n").unwrap();
    let o = run(&["precision-report", "--config", conf.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("n          64"));
    std::fs::write(&conf, "garbage line\n").unwrap();
    assert_eq!(run(&["precision-report", "--config", conf.to_str().unwrap()]).status.code(), Some(4));
}
