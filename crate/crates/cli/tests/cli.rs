use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn randrk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randrk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn converge(out: &Path, threads: &str) -> Output {
    randrk(&[
        "converge",
        "--problem",
        "jump",
        "--method",
        "rand_rk2",
        "--p",
        "2",
        "--samples",
        "1000",
        "--n-min",
        "3",
        "--n-max",
        "10",
        "--seed",
        "42",
        "--threads",
        threads,
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn converge_writes_csv_and_slope() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("jump.csv");
    let o = converge(&csv, "0");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[0], "problem,method,p,h,samples,error,stderr,seed");
    assert!(lines[1].starts_with("jump[T=1],rand-rk2,"));
    assert!(!text.contains('\r'));
    let out = stdout(&o);
    let slope: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("fitted order "))
        .and_then(|l| l.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((1.3..=1.7).contains(&slope), "{out}");
}

#[test]
fn csv_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<Vec<u8>> = ["1", "4", "1", "0"]
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let path = dir.path().join(format!("run{i}.csv"));
            assert_eq!(converge(&path, t).status.code(), Some(0));
            fs::read(path).unwrap()
        })
        .collect();
    assert!(files.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn adversarial_example() {
    let o = randrk(&["adversarial", "--h", "0.0625", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("classical error 1.0\n"), "{out}");
    assert!(out.contains("randomized error 0.0\n"), "{out}");
}

#[test]
fn bad_gamma_exits_2() {
    let o = randrk(&["converge", "--problem", "singular", "--gamma", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("gamma must exceed 1") && err.contains("--gamma"), "{err}");
}

#[test]
fn flag_errors_exit_2_and_name_the_flag() {
    for (args, flag) in [
        (vec!["converge", "--bogus"], "--bogus"),
        (vec!["converge", "--method", "heun"], "--method"),
        (vec!["converge", "--problem", "stiff"], "--problem"),
        (vec!["converge", "--p", "1"], "--p"),
        (vec!["converge", "--n-min", "8", "--n-max", "4"], "--n-min"),
        (vec!["solve", "--h", "1.5"], "--h"),
        (vec!["solve", "--T", "-1"], "--T"),
        (
            vec!["converge", "--problem", "singular-lip", "--alpha", "0.7"],
            "--alpha",
        ),
        (vec!["constants", "--cp", "0"], "--cp"),
        (vec!["as-check", "--margin", "-1"], "--margin"),
    ] {
        let o = randrk(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(flag), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn numerical_abort_exits_3_and_names_sample_and_step() {
    // The first stage of rand-rk2 evaluates the left node, which is the singular point T/2.
    let o = randrk(&[
        "solve",
        "--problem",
        "singular-lip",
        "--method",
        "rand-rk2",
        "--h",
        "0.0625",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("sample 0") && err.contains("step 9"), "{err}");
    assert!(err.contains("reseed"), "{err}");
}

#[test]
fn unwritable_output_exits_3() {
    let o = randrk(&[
        "converge",
        "--samples",
        "10",
        "--n-max",
        "5",
        "--out",
        "/nonexistent/dir/out.csv",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn solve_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("path.csv");
    let o = randrk(&[
        "solve",
        "--problem",
        "jump",
        "--method",
        "rand-rk2",
        "--h",
        "0.125",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert_eq!(text.lines().next(), Some("j,t,u0,exact0"));
    assert!(stdout(&o).contains("max path error"));
}

#[test]
fn plot_single_and_two_series() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    assert_eq!(converge(&a, "0").status.code(), Some(0));
    let o = randrk(&["plot", "--input", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let svg = fs::read_to_string(dir.path().join("a.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert!(svg.contains("slope="));

    let b = dir.path().join("b.csv");
    let o = randrk(&[
        "converge",
        "--problem",
        "jump",
        "--method",
        "rand-euler",
        "--samples",
        "200",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let both = fs::read_to_string(&a).unwrap() + fs::read_to_string(&b).unwrap().split_once('\n').unwrap().1;
    let merged = dir.path().join("both.csv");
    fs::write(&merged, both).unwrap();
    let svg_path = dir.path().join("both.svg");
    let o = randrk(&[
        "plot",
        "--input",
        merged.to_str().unwrap(),
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(svg_path).unwrap().matches("<polyline").count(), 2);
}

#[test]
fn plot_rejects_short_or_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.csv");
    fs::write(
        &one,
        "problem,method,p,h,samples,error,stderr,seed\njump[T=1],rand-rk2,2,0.125,10,0.01,0.001,42\n",
    )
    .unwrap();
    assert_eq!(
        randrk(&["plot", "--input", one.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "a,b\n1,2\n").unwrap();
    assert_eq!(
        randrk(&["plot", "--input", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let missing = dir.path().join("missing.csv");
    assert_eq!(
        randrk(&["plot", "--input", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn constants_and_quad_and_as_check_run() {
    let o = randrk(&["constants", "--problem", "manufactured", "--gamma", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.contains("C_U ") && out.contains("C_V ") && !out.contains("C_U n/a"),
        "{out}"
    );

    let o = randrk(&[
        "quad",
        "--problem",
        "singular",
        "--gamma",
        "3",
        "--samples",
        "200",
        "--n-max",
        "6",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("bias at h"));

    let o = randrk(&[
        "as-check",
        "--problem",
        "singular-lip",
        "--p",
        "4",
        "--samples",
        "50",
        "--n-min",
        "3",
        "--n-max",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("last violating level"));

    let o = randrk(&[
        "converge",
        "--problem",
        "manufactured",
        "--lambda",
        "-2",
        "--samples",
        "20",
        "--n-max",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}
