use std::time::Duration;

use mcsplit::bench::{
    emit_cactus, parse_manifest, read_records, run_suite, solved_counts, write_records, Instance, RunStatus,
    SuiteOptions,
};
use mcsplit::core::oracle::{mcs_bruteforce, verify};
use mcsplit::core::{solve, Graph, Status, Unlimited};
use mcsplit::format::{read_graph, write_graph, Format};
use mcsplit::parallel::{solve_parallel, solve_parallel_report, ParallelConfig};
use mcsplit::portfolio::{run_portfolio, PortfolioConfig};
use mcsplit::{Deadline, EngineSpec};

fn pair(seed: u64) -> (Graph, Graph) {
    let ng = 4 + (seed % 6) as usize;
    let nh = 4 + ((seed / 6) % 6) as usize;
    let d = [0.2, 0.5, 0.8][(seed % 3) as usize];
    match seed % 3 {
        0 => (Graph::random(ng, d, seed), Graph::random(nh, d, seed + 1000)),
        1 => (Graph::random_directed(ng, d, seed), Graph::random_directed(nh, d, seed + 1000)),
        _ => (
            Graph::random(ng, d, seed).with_random_labels(3, seed),
            Graph::random(nh, d, seed + 1000).with_random_labels(3, seed + 1),
        ),
    }
}

#[test]
fn parallel_matches_the_oracle() {
    for seed in 0..60 {
        let (g, h) = pair(seed);
        let want = mcs_bruteforce(&g, &h).unwrap().size;
        for (workers, part_level) in [(8, 5), (3, 1), (2, 0)] {
            let config = ParallelConfig { workers, part_level, ..ParallelConfig::default() };
            let r = solve_parallel(&g, &h, config, &Unlimited).unwrap();
            assert_eq!(r.status, Status::Optimal);
            assert_eq!(r.size(), want, "seed {seed} workers {workers}");
            assert!(verify(&g, &h, &r.mapping).unwrap());
        }
    }
}

#[test]
fn single_worker_replays_the_sequential_search() {
    for seed in 0..30 {
        let (g, h) = pair(seed + 77);
        let seq = solve(&g, &h, &Unlimited).unwrap();
        let par = solve_parallel(&g, &h, ParallelConfig::with_workers(1), &Unlimited).unwrap();
        assert_eq!(par.mapping, seq.mapping);
        assert_eq!(par.stats.recursions, seq.stats.recursions);
    }
}

#[test]
fn incumbent_log_only_grows() {
    let g = Graph::random(14, 0.4, 3);
    let h = Graph::random(13, 0.4, 4);
    let report = solve_parallel_report(&g, &h, ParallelConfig::with_workers(4), &Unlimited).unwrap();
    assert!(report.incumbent_log.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(report.incumbent_log.last().copied(), Some(report.result.size()));
    assert_eq!(report.workers.len(), 4);
}

#[test]
fn parallel_honours_the_deadline() {
    let g = Graph::random(40, 0.5, 1);
    let h = Graph::random(40, 0.5, 2);
    let r = solve_parallel(&g, &h, ParallelConfig::with_workers(3), &Deadline::new(Some(Duration::from_millis(50))))
        .unwrap();
    assert_eq!(r.status, Status::Timeout);
    assert!(verify(&g, &h, &r.mapping).unwrap());
}

#[test]
fn portfolio_times_out_with_a_valid_mapping() {
    let g = Graph::random(40, 0.5, 5);
    let h = Graph::random(40, 0.5, 6);
    let specs = ["recursive", "iterative"].iter().map(|n| EngineSpec::preset(n).unwrap()).collect();
    let r = run_portfolio(&g, &h, &PortfolioConfig::race_all(specs, Duration::from_millis(100))).unwrap();
    assert_eq!(r.status, Status::Timeout);
    assert!(r.winner.is_none());
    assert_eq!(r.grace_violations, 0);
    assert!(verify(&g, &h, &r.mapping).unwrap());
}

#[test]
fn mivia_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (i, g) in [Graph::random(1, 0.0, 0), Graph::random(30, 0.3, 1), Graph::random(254, 0.05, 2)].iter().enumerate()
    {
        let path = dir.path().join(format!("g{i}.mivia"));
        write_graph(&path, g, Format::Mivia).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let back = read_graph(&path, Format::Mivia).unwrap();
        assert_eq!(&back, g);
        write_graph(&path, &back, Format::Mivia).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), bytes);
    }
}

#[test]
fn bench_twenty_pairs_two_engines() {
    let instances: Vec<Instance> = (0..20)
        .map(|s| {
            let (g, h) = pair(s);
            Instance::loaded(format!("p{s}"), "random", g, h)
        })
        .collect();
    let engines: Vec<EngineSpec> = ["recursive", "iterative"].iter().map(|n| EngineSpec::preset(n).unwrap()).collect();
    let options = SuiteOptions { budget: Duration::from_secs(10), concurrency: 2 };
    let records = run_suite(&instances, &engines, options);
    assert_eq!(records.len(), 40);
    assert!(records.iter().all(|r| r.status == RunStatus::Optimal));
    for (a, b) in
        records.iter().filter(|r| r.engine == "recursive").zip(records.iter().filter(|r| r.engine == "iterative"))
    {
        assert_eq!((a.pair_id.as_str(), a.size), (b.pair_id.as_str(), b.size));
    }
    let mut buf = Vec::new();
    write_records(&mut buf, &records).unwrap();
    assert_eq!(read_records(buf.as_slice()).unwrap(), records);
    assert_eq!(solved_counts(&records).values().copied().collect::<Vec<_>>(), vec![20, 20]);
    let cactus = emit_cactus(&records);
    assert_eq!(cactus.len(), 40);
    assert!(cactus.windows(2).filter(|w| w[0].engine == w[1].engine).all(|w| w[0].seconds <= w[1].seconds));
}

#[test]
fn manifest_files_resolve_against_the_root() {
    let dir = tempfile::tempdir().unwrap();
    write_graph(&dir.path().join("a.grf"), &Graph::random(6, 0.5, 1), Format::Mivia).unwrap();
    write_graph(&dir.path().join("b.grf"), &Graph::random(7, 0.5, 2), Format::Mivia).unwrap();
    let manifest = "# pairs\na.grf b.grf small\nb.grf missing.grf small\n";
    let instances = parse_manifest(manifest, dir.path(), Format::Mivia).unwrap();
    let records = run_suite(
        &instances,
        &[EngineSpec::preset("recursive").unwrap()],
        SuiteOptions::sequential(Duration::from_secs(5)),
    );
    assert_eq!(records[0].status, RunStatus::Optimal);
    assert_eq!(records[1].status, RunStatus::Error);
    assert_eq!(records[1].size, None);
}
