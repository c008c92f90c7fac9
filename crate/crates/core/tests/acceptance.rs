//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails or exceeds its time limit.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use qgeom::embed::{
    canonical_embedding, check_line_images, classify_embeddings, connecting_automorphism, extract_star_subspace,
    induce_point_map, reduce_to_quotient, verify_isometric, ClassifyOptions, EmbedError, SearchOptions,
};
use qgeom::grassmann::duality_vertex_map;
use qgeom::{
    bfs_distance, build_polar_space, dual_polar_graph, duality_map, enum_grassmannian, gaussian_binomial,
    intersection_numbers, FormSpec, GrassmannGraph, MatrixGF, PolarSpace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use common::*;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

fn w32(n: usize) -> PolarSpace {
    let f = gf(2);
    build_polar_space(&f, n, &FormSpec::symplectic(&f, 4)).unwrap()
}

fn q42() -> PolarSpace {
    build_polar_space(&gf(2), 5, &FormSpec::quadratic(5, &[(0, 1, 1), (2, 3, 1), (4, 4, 1)])).unwrap()
}

fn h34() -> PolarSpace {
    build_polar_space(&gf4(), 4, &FormSpec::hermitian_identity(4)).unwrap()
}

fn dual_polar_instances() -> Vec<(&'static str, PolarSpace)> {
    vec![("W(3,2)", w32(4)), ("Q(4,2)", q42()), ("H(3,4)", h34())]
}

fn criterion_1() -> Check {
    let mut checked = 0;
    for q in [2usize, 3, 4] {
        let f = field_by_order(q);
        for n in 0..=6 {
            for k in 0..=n {
                let expected = gaussian_binomial(n, k, q as u64);
                ensure!(expected == count_by_bases(n, k, q as u128), "product formula disagrees at q={q} n={n} k={k}");
                let list = enum_grassmannian(&f, n, k, 1_000_000).map_err(|e| e.to_string())?;
                ensure!(list.len() as u128 == expected, "q={q} n={n} k={k}: enumerated {} vs {expected}", list.len());
                checked += 1;
            }
        }
    }
    for (q, n, k, count) in [(2, 4, 2, 35), (2, 5, 3, 155), (2, 6, 3, 1395), (3, 4, 2, 130)] {
        ensure!(gaussian_binomial(n, k, q) == count, "known value {count} missed");
    }
    Ok(format!("{checked} (q, n, k) triples agree"))
}

fn criterion_2() -> Check {
    let mut pairs = 0;
    for (q, n, k) in [(2, 4, 2), (2, 5, 3), (3, 4, 2)] {
        let f = field_by_order(q);
        let g = GrassmannGraph::new(&f, n, k).map_err(|e| e.to_string())?;
        let vs = g.vertices();
        for a in 0..vs.len() {
            for b in 0..vs.len() {
                let d = bfs_distance(g.graph(), a, b).map_err(|e| e.to_string())?;
                ensure!(d == k - vs[a].meet_dim(&f, &vs[b]), "Γ_{k}(GF({q})^{n}) pair ({a}, {b})");
                pairs += 1;
            }
        }
    }
    for (name, ps) in dual_polar_instances() {
        let g = dual_polar_graph(&ps);
        let ms = ps.maximals();
        for a in 0..ms.len() {
            for b in 0..ms.len() {
                let d = bfs_distance(g.graph(), a, b).map_err(|e| e.to_string())?;
                ensure!(d == ps.rank() - ms[a].meet_dim(ps.field(), &ms[b]), "{name} pair ({a}, {b})");
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} ordered pairs"))
}

fn criterion_3() -> Check {
    let ps = w32(4);
    let g = dual_polar_graph(&ps);
    let summary = (ps.points().len(), ps.lines().len(), ps.rank(), ps.maximals().len());
    ensure!(summary == (15, 15, 2, 15), "W(3,2) gives {summary:?}");
    ensure!((0..g.order()).all(|v| g.graph().degree(v) == 6), "W(3,2) dual polar graph is not 6-regular");
    ensure!(g.graph().diameter() == Ok(2), "W(3,2) diameter");
    let oracle = isotropic_points(ps.field(), 4, &FormSpec::symplectic(ps.field(), 4));
    ensure!(oracle.len() == 15, "brute-force W(3,2) point count {}", oracle.len());

    let ps = h34();
    let g = dual_polar_graph(&ps);
    ensure!((ps.points().len(), ps.maximals().len()) == (45, 27), "H(3,4) counts");
    ensure!((0..g.order()).all(|v| g.graph().degree(v) == 10), "H(3,4) dual polar graph is not 10-regular");
    let oracle = isotropic_points(ps.field(), 4, &FormSpec::hermitian_identity(4));
    ensure!(oracle.len() == 45, "brute-force H(3,4) point count {}", oracle.len());
    Ok("W(3,2): 15/15/2/15, 6-regular, diameter 2; H(3,4): 45/27, 10-regular".into())
}

fn criterion_4() -> Check {
    let f = gf(2);
    let g = GrassmannGraph::new(&f, 4, 2).map_err(|e| e.to_string())?;
    let mut arrays = vec![format!("Γ_2(GF(2)^4) {:?}", intersection_numbers(g.graph()).map_err(|e| e.to_string())?.intersection_array())];
    for (name, ps) in dual_polar_instances() {
        let numbers = intersection_numbers(dual_polar_graph(&ps).graph()).map_err(|e| format!("{name}: {e}"))?;
        arrays.push(format!("{name} {:?}", numbers.intersection_array()));
    }
    Ok(arrays.join(", "))
}

fn criterion_5() -> Check {
    let ps = w32(5);
    let e = canonical_embedding(&ps, 3).map_err(|e| e.to_string())?;
    let star = extract_star_subspace(ps.field(), &e).map_err(|e| e.to_string())?;
    ensure!(star.subspace.dim() == 1, "dim U = {}", star.subspace.dim());
    let report = verify_isometric(ps.field(), &e).map_err(|e| e.to_string())?;
    ensure!(report.pairs_checked == 105, "{} pairs checked", report.pairs_checked);
    let small = canonical_embedding(&w32(4), 3);
    ensure!(matches!(small, Err(EmbedError::NoValidU { .. })), "n=4, k=3 gave {small:?}");
    Ok("dim U = 1, 105 pairs isometric, n=4 k=3 rejected with NoValidU".into())
}

fn criterion_6() -> Check {
    let ps = w32(5);
    let f = ps.field();
    let e = canonical_embedding(&ps, 3).map_err(|e| e.to_string())?;
    let star = extract_star_subspace(f, &e).map_err(|e| e.to_string())?;
    ensure!(star.anomaly.is_none(), "star anomaly {:?}", star.anomaly);
    ensure!(star.subspace.dim() == e.k() - e.m(), "dim U = {}", star.subspace.dim());
    let (_, g) = reduce_to_quotient(f, &e, &star.subspace).map_err(|e| e.to_string())?;
    let q_map = induce_point_map(&ps, &g).map_err(|e| e.to_string())?;
    ensure!(q_map.anomalies.is_empty(), "point map anomalies {:?}", q_map.anomalies);
    let distinct: std::collections::BTreeSet<_> = q_map.images.iter().collect();
    ensure!(distinct.len() == 15, "q has {} distinct images", distinct.len());
    let lines = check_line_images(&ps, &g, &q_map).map_err(|e| e.to_string())?;
    ensure!(lines.full_lines == 15, "{} full lines", lines.full_lines);
    Ok("dim U = 1, q injective on 15 points, 15/15 lines full, no anomalies".into())
}

fn criterion_7() -> Check {
    let ps = w32(5);
    let f = ps.field().clone();
    let canonical = canonical_embedding(&ps, 3).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut round_trips = 0;
    for _ in 0..5 {
        let s = loop {
            let rows: Vec<Vec<u8>> = (0..5).map(|_| (0..5).map(|_| rng.random_range(0..2u8)).collect()).collect();
            let m = MatrixGF::from_rows(5, &rows).unwrap();
            if m.is_invertible(&f) {
                break m;
            }
        };
        let copy = canonical.map_images(|x| x.transform(&f, &s, 0)).map_err(|e| e.to_string())?;
        let w = connecting_automorphism(&ps, &canonical, &copy, None).map_err(|e| format!("round trip: {e}"))?;
        ensure!(w.connects(&f, &canonical, &copy), "round-trip witness does not connect");
        round_trips += 1;
    }

    let opts = ClassifyOptions { search: SearchOptions { anchor: true, budget: None }, ..Default::default() };
    let (_, report) = classify_embeddings(&ps, 3, opts).map_err(|e| e.to_string())?;
    let summary = format!(
        "{} embeddings, pipeline passed {}, failures {:?}, {} classes of sizes {:?}, {round_trips} round trips reconnected",
        report.embeddings, report.pipeline_passed, report.pipeline_failures, report.classes, report.class_sizes
    );
    ensure!(report.pipeline_passed == report.embeddings && report.anomalies == 0, "{summary}");
    ensure!(report.classes == 1 && report.classes_exact, "{summary}");
    Ok(summary)
}

fn criterion_8() -> Check {
    let f = gf(2);
    let g = GrassmannGraph::new(&f, 4, 2).map_err(|e| e.to_string())?;
    let map = duality_vertex_map(&g, &g).map_err(|e| e.to_string())?;
    for a in 0..g.order() {
        ensure!(duality_map(&f, &duality_map(&f, &g.vertices()[a])) == g.vertices()[a], "not an involution at {a}");
        ensure!(map[map[a]] == a, "vertex map not an involution at {a}");
        for b in 0..g.order() {
            ensure!(g.graph().is_adjacent(a, b) == g.graph().is_adjacent(map[a], map[b]), "adjacency broken at ({a}, {b})");
        }
    }
    Ok(format!("{} pairs", g.order() * g.order()))
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name).display().to_string()
}

/// Runs one CLI invocation in process; returns exit code, stdout, stderr and
/// the bytes of every file it wrote.
fn run_cli(args: &[String], files: &[PathBuf]) -> (i32, Vec<u8>, Vec<u8>, Vec<Vec<u8>>) {
    for p in files {
        let _ = std::fs::remove_file(p);
    }
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("qgeom".to_string()).chain(args.iter().cloned());
    let code = qgeom::cli::run_with_output(argv, &mut out, &mut err);
    let written = files.iter().map(|p| std::fs::read(p).unwrap_or_default()).collect();
    (code, out, err, written)
}

fn criterion_9() -> Check {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let file = |name: &str| dir.path().join(name);
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let path = |name: &str| file(name).display().to_string();

    let mut jobs: Vec<(Vec<String>, Vec<PathBuf>)> = Vec::new();
    for (q, n, k) in [("gf2.json", "4", "2"), ("gf2.json", "5", "3"), ("gf3.json", "4", "2")] {
        let (g6, csv, json) = (path("g.g6"), path("g.csv"), path("g.json"));
        jobs.push((
            s(&["grassmann", "--field", &config(q), "--n", n, "--k", k, "--intersection-array", "--export", &format!("g6:{g6}"), "--export", &format!("csv:{csv}"), "--export", &format!("json:{json}")]),
            vec![file("g.g6"), file("g.csv"), file("g.json")],
        ));
    }
    for (cfg, n) in [("w32.json", "4"), ("q42.json", "5"), ("h34.json", "4")] {
        let exports = ["g6:d.g6", "json:d.json", "points:p.json", "lines:l.json", "maximals:m.json"];
        let mut args = s(&["polar", "--polar", &config(cfg), "--n", n, "--intersection-array"]);
        for e in exports {
            let (kind, name) = e.split_once(':').unwrap();
            args.extend(["--export".to_string(), format!("{kind}:{}", path(name))]);
        }
        jobs.push((args, ["d.g6", "d.json", "p.json", "l.json", "m.json"].iter().map(|n| file(n)).collect()));
    }
    let w = config("w32.json");
    jobs.push((s(&["embed", "canonical", "--polar", &w, "--n", "5", "--k", "3", "--all-transversals", "--out", &path("c.json")]), vec![file("c.json")]));
    jobs.push((s(&["embed", "canonical", "--polar", &w, "--n", "4", "--k", "3"]), vec![]));
    jobs.push((s(&["embed", "analyze", "--polar", &w, "--n", "5", "--k", "3", "--out", &path("a.json")]), vec![file("a.json")]));
    jobs.push((s(&["embed", "search", "--polar", &w, "--n", "5", "--k", "3", "--anchor", "--out", &path("s.json")]), vec![file("s.json")]));
    jobs.push((s(&["embed", "classify", "--polar", &w, "--n", "5", "--k", "3", "--anchor", "--out", &path("k.json")]), vec![file("k.json")]));

    for (args, files) in &jobs {
        let mut runs = Vec::new();
        for workers in ["1", "4", "4"] {
            let mut full = s(&["--workers", workers]);
            full.extend(args.iter().cloned());
            runs.push(run_cli(&full, files));
        }
        let label = args[..2].join(" ");
        ensure!(runs[0].1.len() + runs[0].2.len() > 0, "{label}: no output");
        ensure!(runs.windows(2).all(|r| r[0] == r[1]), "{label}: outputs differ between runs");
    }

    // duality has no CLI surface; serialize the vertex map under two pools
    let dual = |threads: usize| -> Vec<u8> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let f = gf(2);
            let g = GrassmannGraph::new(&f, 4, 2).unwrap();
            serde_json::to_vec(&duality_vertex_map(&g, &g).unwrap()).unwrap()
        })
    };
    ensure!(dual(1) == dual(4), "duality map differs between pools");
    Ok(format!("{} commands byte-identical across 3 runs (workers 1, 4, 4)", jobs.len()))
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Check); 9] = [
        (1, "counting", 10, criterion_1),
        (2, "distance coherence", 60, criterion_2),
        (3, "polar constructions", 30, criterion_3),
        (4, "distance regularity", 30, criterion_4),
        (5, "canonical embedding", 5, criterion_5),
        (6, "structural pipeline", 5, criterion_6),
        (7, "unique embedding at desk scale", 600, criterion_7),
        (8, "duality", 5, criterion_8),
        (9, "determinism", 900, criterion_9),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(limit) => Err(format!("{detail}; over the {limit} s limit")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {id} ({name}): PASS [{:.1} s] {detail}", elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL [{:.1} s] {detail}", elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
