use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kvsched(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kvsched"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Column `name` of the single data row of a two-line CSV.
fn field(csv: &str, name: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    row[i].to_string()
}

fn fixture() -> String {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/heavy_tail_lengths.txt");
    root.to_str().unwrap().to_string()
}

#[test]
fn run_reproduces_the_pipeline_example() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run", "--gen", "identical", "--n", "15", "--o", "5", "--s", "0", "--M", "15", "--policy",
        "sps", "--k", "5", "--tau", "5", "--out", "res",
    ];
    let out = kvsched(&args, dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = fs::read_to_string(dir.path().join("res/summary.csv")).unwrap();
    assert_eq!(field(&summary, "total_flow_time"), "180");
    assert_eq!(field(&summary, "peak_memory"), "15");
    assert_eq!(stdout(&out), summary);
    for name in ["completions", "memory", "timeline", "kills", "instance"] {
        let text = fs::read_to_string(dir.path().join(format!("res/{name}.csv"))).unwrap();
        assert!(!text.contains('\r'), "{name} has CR line endings");
    }
    let completions = fs::read_to_string(dir.path().join("res/completions.csv")).unwrap();
    assert_eq!(completions.lines().count(), 16);
}

#[test]
fn run_single_unit_job() {
    let dir = tempfile::tempdir().unwrap();
    let out = kvsched(
        &["run", "--n", "1", "--o", "1", "--M", "1", "--policy", "gsa", "--alpha", "2", "--out", "r"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(field(&stdout(&out), "total_flow_time"), "1");
}

#[test]
fn run_two_point_slicing() {
    let dir = tempfile::tempdir().unwrap();
    let out = kvsched(
        &["run", "--gen", "two-point", "--s", "96", "--M", "256", "--policy", "gsa", "--alpha", "2", "--out", "r"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let flow: f64 = field(&stdout(&out), "total_flow_time").parse().unwrap();
    assert!((flow - 18268.0).abs() <= 0.02 * 18268.0, "flow {flow}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for out_dir in ["one", "two"] {
        let out = kvsched(
            &[
                "run", "--gen", "two-point", "--n-short", "40", "--n-long", "3", "--o-long", "20",
                "--s", "4", "--M", "64", "--policy", "a-min", "--seed", "7", "--out", out_dir,
            ],
            dir.path(),
        );
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for name in ["summary", "completions", "memory", "timeline", "kills", "instance"] {
        let a = fs::read(dir.path().join(format!("one/{name}.csv"))).unwrap();
        let b = fs::read(dir.path().join(format!("two/{name}.csv"))).unwrap();
        assert_eq!(a, b, "{name}.csv differs");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("ex.conf"),
        "# pipeline example\ngen = identical\nn = 15\no = 5\nM = 15\npolicy = sims\nout = res\n",
    )
    .unwrap();
    let out = kvsched(&["run", "--config", "ex.conf"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(field(&stdout(&out), "total_flow_time"), "225");

    let out = kvsched(&["run", "--config", "ex.conf", "--policy", "sps", "--k", "5", "--tau", "5"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(field(&stdout(&out), "total_flow_time"), "180");
}

#[test]
fn sweep_over_trace_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let trace = fixture();
    let out = kvsched(
        &[
            "sweep", "--gen", "trace", "--trace", &trace, "--s", "79", "--M", "8192", "--ns",
            "100:1000:100", "--policies", "gba-d,gsa-spec,vllm,a-min,mc-sf", "--beta", "64", "--out",
            "sweep.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 50);
    // Point-major order: n = 100 for the first five policies.
    assert!(rows[..5].iter().all(|r| r.starts_with("100,")));
    assert!(rows[45..].iter().all(|r| r.starts_with("1000,")));
    let policies: Vec<&str> = rows[..5].iter().map(|r| r.split(',').nth(5).unwrap()).collect();
    assert_eq!(policies, vec!["gba-d", "gsa-spec", "vllm", "a-min", "mc-sf"]);
}

#[test]
fn sweep_statistics_over_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = kvsched(
        &[
            "sweep", "--gen", "two-point", "--n-short", "60", "--n-long", "4", "--o-long", "40",
            "--s", "8", "--M", "96", "--policies", "a-min,gsa", "--seeds", "20",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][5], rows[0][6]), ("a-min", "20"));
    assert!(rows[0][8].parse::<f64>().unwrap() > 0.0);
    // Deterministic policy on a fixed order runs once.
    assert_eq!((rows[1][5], rows[1][6], rows[1][8]), ("gsa", "1", "0.000"));

    let single = kvsched(
        &["sweep", "--n", "15", "--o", "5", "--M", "15", "--policies", "sims"],
        dir.path(),
    );
    assert!(single.status.success());
    assert!(stdout(&single).lines().nth(1).unwrap().contains(",225.000,"));
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["formulas", "lemmas"] {
        let out = kvsched(&["verify", suite], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        assert!(stdout(&out).lines().all(|l| l.starts_with("PASS")));
    }
    let out = kvsched(&["verify", "everything"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("UnknownSuite"));
}

#[test]
fn errors_exit_one_with_their_name() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&[&str], &str)] = &[
        (&["run", "--n", "1", "--o", "9", "--M", "8", "--policy", "gba"], "InfeasibleJob"),
        (&["run", "--gen", "trace", "--trace", "missing.txt", "--M", "9", "--policy", "gba"], "FileNotFound"),
        (&["run", "--n", "2", "--o", "2", "--M", "9", "--policy", "gba", "--alpha", "x"], "ParseRational"),
        (&["run", "--n", "2", "--o", "2", "--M", "9", "--policy", "gsa", "--alpha", "1"], "InvalidAlpha"),
        (&["run", "--n", "2", "--o", "4", "--M", "9", "--policy", "sps", "--tau", "3"], "SliceTooShort"),
        (&["run", "--n", "2", "--M", "9", "--policy", "gba"], "MissingParameter"),
        (&["run", "--n", "3", "--o", "4", "--M", "9", "--policy", "gba", "--horizon", "2"], "NonTermination"),
        (&["run", "--config", "nope.conf", "--policy", "gba"], "ConfigError"),
        (&["render", "--timeline", "t.csv", "--instance", "i.csv", "--out", "x.svg"], "Io"),
    ];
    for (args, name) in cases {
        let out = kvsched(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).contains(name), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn render_from_exports() {
    let dir = tempfile::tempdir().unwrap();
    let out = kvsched(
        &["run", "--gen", "two-point", "--s", "96", "--M", "256", "--policy", "gsa", "--out", "r"],
        dir.path(),
    );
    assert!(out.status.success());
    let out = kvsched(
        &[
            "render", "--timeline", "r/timeline.csv", "--instance", "r/instance.csv", "--kills",
            "r/kills.csv", "--out", "gsa.svg",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let svg = fs::read_to_string(dir.path().join("gsa.svg")).unwrap();
    assert!(svg.contains("job 0 killed"));
    assert!(svg.contains("M = 256"));

    // Header-only timeline: axes and nothing else.
    fs::write(dir.path().join("empty.csv"), "t,active_ids,mem_used\n").unwrap();
    let out = kvsched(
        &["render", "--timeline", "empty.csv", "--instance", "r/instance.csv", "--out", "empty.svg"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let svg = fs::read_to_string(dir.path().join("empty.svg")).unwrap();
    assert!(svg.contains("round") && !svg.contains("<title>"));

    fs::write(dir.path().join("bad.csv"), "t,active_ids,mem_used\n0,zz,1\n").unwrap();
    let out = kvsched(
        &["render", "--timeline", "bad.csv", "--instance", "r/instance.csv", "--out", "bad.svg"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("MalformedInput"), "{}", stderr(&out));
}
