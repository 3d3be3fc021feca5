use std::path::Path;
use std::process::{Command, Output};

use mcsplit::core::Graph;
use mcsplit::format::{write_graph, Format};

fn mcsplit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcsplit")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn size_line(o: &Output) -> String {
    stdout(o).lines().find(|l| l.starts_with("size:")).unwrap_or_default().to_string()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_graph(&dir.path().join("g.grf"), &Graph::random(9, 0.5, 1), Format::Mivia).unwrap();
    write_graph(&dir.path().join("h.grf"), &Graph::random(10, 0.5, 2), Format::Mivia).unwrap();
    dir
}

#[test]
fn every_engine_flag_agrees() {
    let dir = setup();
    let base = mcsplit(&["solve", "g.grf", "h.grf"], dir.path());
    assert!(base.status.success(), "{}", String::from_utf8_lossy(&base.stderr));
    let want = size_line(&base);
    let variants: &[&[&str]] = &[
        &["--engine", "parallel", "--workers", "3", "--part-level", "2"],
        &["--engine", "iterative"],
        &["--engine", "iterative", "--wide"],
        &["--engine", "goal-directed"],
        &["--order", "degree"],
        &["--order", "block"],
        &["--order", "components", "--jump", "plus1", "--deadend", "abs:10"],
        &["--jump", "double", "--deadend", "rel:2"],
        &["--restarts", "seed:3"],
        &["--restarts", "seed:3", "--deadend", "abs:50"],
    ];
    for extra in variants {
        let mut args = vec!["solve", "g.grf", "h.grf"];
        args.extend_from_slice(extra);
        let out = mcsplit(&args, dir.path());
        assert!(out.status.success(), "{extra:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(size_line(&out), want, "{extra:?}");
    }
}

#[test]
fn exit_codes() {
    let dir = setup();
    write_graph(&dir.path().join("big1.grf"), &Graph::random(60, 0.5, 3), Format::Mivia).unwrap();
    write_graph(&dir.path().join("big2.grf"), &Graph::random(60, 0.5, 4), Format::Mivia).unwrap();
    let timeout = mcsplit(&["solve", "big1.grf", "big2.grf", "--budget", "0.05"], dir.path());
    assert_eq!(timeout.status.code(), Some(2));
    assert!(stdout(&timeout).contains("status: timeout"));
    assert_eq!(mcsplit(&["solve", "g.grf", "nope.grf"], dir.path()).status.code(), Some(3));
    let bad = mcsplit(&["solve", "g.grf", "h.grf", "--engine", "iterative", "--restarts", "seed:1"], dir.path());
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn gen_then_solve_text_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    for (name, seed) in [("a.txt", "1"), ("b.txt", "2")] {
        let out = mcsplit(
            &["gen", "8", "--seed", seed, "--directed", "--labels", "2", "--format", "text", "-o", name],
            dir.path(),
        );
        assert!(out.status.success());
    }
    for _ in 0..2 {
        let out = mcsplit(&["solve", "a.txt", "b.txt", "--format", "text", "--csv", "runs.csv"], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let records = mcsplit::bench::read_records(std::fs::File::open(dir.path().join("runs.csv")).unwrap()).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].size, records[1].size);
}

#[test]
fn portfolio_in_process_and_subprocess() {
    let dir = setup();
    let want = size_line(&mcsplit(&["solve", "g.grf", "h.grf"], dir.path()));
    let engines = "[[engine]]\nid = \"rec\"\nengine = \"recursive\"\n\n[[engine]]\nid = \"it\"\nengine = \"iterative\"\nstage = 1\n\n[[engine]]\nid = \"gd\"\nengine = \"recursive\"\ngoal_directed = true\n";
    let configs = [
        format!("budget = 20.0\n{engines}"),
        format!("mode = \"staged\"\nstage1_budget = 1.0\n{engines}"),
        format!("isolation = \"subprocess\"\nprogram = \"{}\"\n{engines}", env!("CARGO_BIN_EXE_mcsplit")),
    ];
    for (i, cfg) in configs.iter().enumerate() {
        let path = dir.path().join(format!("p{i}.toml"));
        std::fs::write(&path, cfg).unwrap();
        let out = mcsplit(&["solve", "g.grf", "h.grf", "--portfolio", path.to_str().unwrap()], dir.path());
        assert!(out.status.success(), "{cfg}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(size_line(&out), want, "{cfg}");
        assert!(stdout(&out).contains("winner: "));
    }
}

#[test]
fn bench_command_writes_records_and_cactus() {
    let dir = setup();
    std::fs::write(dir.path().join("manifest.txt"), "g.grf h.grf random\nh.grf g.grf random\n").unwrap();
    let out = mcsplit(
        &[
            "bench",
            "--manifest",
            "manifest.txt",
            "--engine",
            "recursive",
            "--engine",
            "iterative",
            "--budget",
            "5",
            "--csv",
            "out.csv",
            "--cactus",
            "cactus.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = mcsplit::bench::read_records(std::fs::File::open(dir.path().join("out.csv")).unwrap()).unwrap();
    assert_eq!(records.len(), 4);
    let cactus = std::fs::read_to_string(dir.path().join("cactus.csv")).unwrap();
    assert_eq!(cactus.lines().count(), 5);
}
