//! Runs the `linqnet` binary on the fixture files.

use std::path::PathBuf;
use std::process::{Command, Output};

use linqnet::cli::{EXIT_INVALID, EXIT_OK, EXIT_PARSE, EXIT_SINGULAR, EXIT_USAGE};
use linqnet::matkit::max_norm;
use linqnet::netfile::{build_partitioned, parse, parse_matrix_assignments};
use linqnet::network::feedback_reduce;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linqnet")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["check", &fixture("cavity.qnet")])), EXIT_OK);
    assert_eq!(code(&run(&["check", &fixture("not_unitary.qnet")])), EXIT_INVALID);
    assert_eq!(code(&run(&["check", &fixture("wrong_direction.qnet")])), EXIT_PARSE);
    assert_eq!(code(&run(&["reduce", &fixture("algebraic_loop.qnet")])), EXIT_SINGULAR);
    assert_eq!(code(&run(&["reduce"])), EXIT_USAGE);
    assert_eq!(code(&run(&["reduce", &fixture("no_such_file.qnet")])), EXIT_USAGE);
    assert_eq!(code(&run(&["frobnicate"])), EXIT_USAGE);
    assert_eq!(code(&run(&["--help"])), EXIT_OK);
}

#[test]
fn parse_errors_carry_the_location() {
    let out = run(&["check", &fixture("wrong_direction.qnet")]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(":4:25:"), "{err}");
}

#[test]
fn freqresp_csv() {
    let out = run(&["freqresp", &fixture("bsloop.qnet"), "--grid", "-10:10:101"]);
    assert_eq!(code(&out), EXIT_OK);
    let (header, rows) = read_csv(&stdout(&out));
    assert_eq!(header, ["omega", "re(Xi[0,0])", "im(Xi[0,0])", "unitarity_residual"]);
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 101);
    assert!((rows[0][0] + 10.0).abs() < 1e-12 && (rows[100][0] - 10.0).abs() < 1e-12);
    for r in &rows {
        assert_eq!(r.len(), 4);
        assert!(r[3] <= 1e-8);
    }
}

#[test]
fn freqresp_columns_grow_with_ports() {
    let out = run(&["freqresp", &fixture("corpus/19_four_port.qnet"), "--grid", "0:1:5"]);
    assert_eq!(code(&out), EXIT_OK);
    // eight hub ports, three of them wired: five external, so 1 + 2·5² + 1 columns
    let (header, rows) = read_csv(&stdout(&out));
    assert_eq!(header.len(), 52);
    assert_eq!(header[51], "unitarity_residual");
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.len() == 52));
}

#[test]
fn freqresp_marks_poles() {
    // an uncoupled mode at ω = 1 puts a pole on the axis
    let dir = std::env::temp_dir().join(format!("linqnet-pole-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pole.qnet");
    let src = "component trap { inputs = 1; modes = 2; S = [[1]]; C = [[1, 0]]; Omega = [[0, 0], [0, -1]]; }";
    std::fs::write(&path, src).unwrap();
    let out = run(&["freqresp", path.to_str().unwrap(), "--grid", "0:2:3", "--sigma", "1e-13"]);
    assert_eq!(code(&out), EXIT_OK);
    let (_, rows) = read_csv(&stdout(&out));
    assert_eq!(rows[1], ["1e0", "NA", "NA", "NA"]);
    assert_ne!(rows[0][1], "NA");
    std::fs::remove_dir_all(dir).unwrap();
}

fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn freqresp_to_file() {
    let dir = std::env::temp_dir().join(format!("linqnet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("resp.csv");
    let out = run(&["freqresp", &fixture("cavity.qnet"), "--grid", "0:1:3", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_OK);
    assert!(out.stdout.is_empty());
    assert_eq!(read_csv(&std::fs::read_to_string(&path).unwrap()).1.len(), 3);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn reduce_prints_loadable_qnet() {
    let out = run(&["reduce", &fixture("bsloop.qnet")]);
    assert_eq!(code(&out), EXIT_OK);
    let text = stdout(&out);
    assert!(text.contains("# ports: probe"));
    let doc = parse(&text).unwrap();
    let reduced = &doc.components[0];
    // α = 0.5, γ₀ = 3 gives γ' = 1
    assert!((reduced.c()[(0, 0)].norm() - 1.0).abs() < 1e-12);
    assert!(reduced.omega()[(0, 0)].norm() < 1e-12);

    let direct = feedback_reduce(&build_partitioned(&parse(&std::fs::read_to_string(fixture("bsloop.qnet")).unwrap()).unwrap()).unwrap()).unwrap();
    assert!(max_norm(&(reduced.s() - direct.s())) == 0.0);
    assert!(max_norm(&(reduced.c() - direct.c())) == 0.0);
}

#[test]
fn output_is_deterministic() {
    let args = ["freqresp", &fixture("corpus/15_redheffer.qnet"), "--grid", "-5:5:41"];
    let first = stdout(&run(&args));
    for _ in 0..3 {
        assert_eq!(stdout(&run(&args)), first);
    }
}

#[test]
fn series_matches_the_network_file() {
    let out = run(&["series", &fixture("corpus/02_cavity.qnet"), &fixture("corpus/04_detuned_phase.qnet")]);
    assert_eq!(code(&out), EXIT_OK);
    let doc = parse(&stdout(&out)).unwrap();
    let comp = &doc.components[0];
    assert_eq!((comp.n_ports(), comp.n_modes()), (1, 2));
}

#[test]
fn star_of_two_halves() {
    let half = fixture("corpus/15_redheffer.qnet");
    let out = run(&["star", &half, &half, "--component", "half", "--split-a", "1", "--split-b", "1"]);
    assert_eq!(code(&out), EXIT_OK, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = parse(&stdout(&out)).unwrap();
    assert_eq!(doc.components[0].n_ports(), 2);
}

#[test]
fn strat_to_ito_and_back() {
    let out = run(&["strat2ito", &fixture("strat.mat")]);
    assert_eq!(code(&out), EXIT_OK);
    let text = stdout(&out);
    for line in text.lines().filter(|l| l.starts_with("# residual")) {
        let value: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
        assert!(value <= 1e-10, "{line}");
    }
    // E = 2 gives S = (1 − i)/(1 + i) = −i
    let entries = parse_matrix_assignments(&text).unwrap();
    let s = &entries.iter().find(|(n, _)| n == "S").unwrap().1;
    assert!((s[(0, 0)] + linqnet::matkit::I).norm() < 1e-15);

    let dir = std::env::temp_dir().join(format!("linqnet-ito-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let ito = dir.join("ito.mat");
    std::fs::write(&ito, &text).unwrap();
    let back = run(&["ito2strat", ito.to_str().unwrap()]);
    assert_eq!(code(&back), EXIT_OK);
    let entries = parse_matrix_assignments(&stdout(&back)).unwrap();
    let e = &entries.iter().find(|(n, _)| n == "E").unwrap().1;
    assert!((e[(0, 0)].re - 2.0).abs() < 1e-12);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn tf_formats() {
    let out = run(&["tf", &fixture("cavity.qnet"), "--s", "1,0", "--format", "csv"]);
    assert_eq!(code(&out), EXIT_OK);
    assert!(!stdout(&out).is_empty());
    let out = run(&["tf", &fixture("cavity.qnet"), "--s", "-1.5,-0.5"]);
    // the cavity pole sits at −γ/2 − iω
    assert_eq!(code(&out), EXIT_SINGULAR);
}
