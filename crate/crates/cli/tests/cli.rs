use std::fs;
use std::process::{Command, Output};

fn bruen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bruen"))
        .args(args)
        .env_remove("BRUEN_CONWAY_FILE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn clique_number_q7() {
    let o = bruen(&["clique-number", "--q", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("omega 4"), "{}", stdout(&o));
}

#[test]
fn clique_number_from_dimacs_matches() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.dimacs");
    let o = bruen(&["build-graph", "--q", "9", "--out", g.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = bruen(&[
        "clique-number",
        "--dimacs",
        g.to_str().unwrap(),
        "--starters",
        "none",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("omega 5"));
}

#[test]
fn find_chains_writes_verifiable_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chains");
    let o = bruen(&["find-chains", "--q", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2 chain class(es)"), "{}", stdout(&o));
    let mut files: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert_eq!(files.len(), 2);
    for f in files {
        let o = bruen(&["verify-chain", f.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
}

#[test]
fn verify_chain_rejects_bad_chain() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.chain");
    fs::write(&f, "q 5\n0 1 2 3\n").unwrap();
    let o = bruen(&["verify-chain", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_chain_file_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("junk.chain");
    fs::write(&f, "q five\n").unwrap();
    let o = bruen(&["verify-chain", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("chains"));
}

#[test]
fn report_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep");
    let o = bruen(&[
        "report",
        "--qs",
        "5,7,9",
        "--out",
        out.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("q,kind,n,m,omega,completed,wall_time_s"));
    let omegas: Vec<&str> = lines.map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(omegas, ["3", "4", "5"]);
    assert!(fs::read_to_string(out.join("figure.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn orbits_q9() {
    let o = bruen(&["orbits", "--q", "9"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("vertices 180"));
}

#[test]
fn corpus_check_passes() {
    let o = bruen(&["corpus-check"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("19/19 pass"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(bruen(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(bruen(&["clique-number"]).status.code(), Some(1));
    assert_eq!(bruen(&["clique-number", "--q", "6"]).status.code(), Some(1));
    assert_eq!(
        bruen(&["clique-number", "--q", "59"]).status.code(),
        Some(1)
    );
    assert_eq!(bruen(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_conway_entry_needs_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("conway.txt");
    fs::write(&table, "# empty table\n").unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["orbits", "--q", "5"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_bruen"))
            .args(&args)
            .env("BRUEN_CONWAY_FILE", &table)
            .output()
            .unwrap()
    };
    let o = run(&[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--allow-non-conway"));
    let o = run(&["--allow-non-conway"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-Conway"));
}

#[test]
fn exhausted_budget_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("dense.dimacs");
    let n = 200;
    let mut edges = Vec::new();
    let mut state = 0x9e3779b97f4a7c15u64;
    for i in 1..=n {
        for j in i + 1..=n {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            if state % 10 != 0 {
                edges.push(format!("e {i} {j}"));
            }
        }
    }
    fs::write(
        &g,
        format!("p edge {n} {}\n{}\n", edges.len(), edges.join("\n")),
    )
    .unwrap();
    let o = bruen(&[
        "clique-number",
        "--dimacs",
        g.to_str().unwrap(),
        "--budget-s",
        "0",
        "--threads",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("budget exhausted"));
}
