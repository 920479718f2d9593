use lambda_lab_cli::run;
use std::path::Path;

fn args(parts: &[&str]) -> Vec<String> {
    let mut v = vec!["lambda-lab".to_string()];
    v.extend(parts.iter().map(|s| s.to_string()));
    v
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn build_capwise_set_and_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("set.json");
    let code = run(args(&[
        "build",
        "--manifold",
        "paraboloid",
        "--d",
        "3",
        "--R",
        "64",
        "--method",
        "capwise",
        "--seed",
        "7",
        "--out",
        set.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let loaded = lambda_lab_core::io::load_set(&set).unwrap();
    // 64 caps x 8 targeted points.
    assert!(
        loaded.len() >= 256 && loaded.len() <= 768,
        "{}",
        loaded.len()
    );
    let text = read(&set);
    assert!(text.contains("\"schema\": \"fset/1\""));
    assert!(text.contains("config_hash"));

    let csv = dir.path().join("kp.csv");
    let code = run(args(&[
        "estimate",
        "--set",
        set.to_str().unwrap(),
        "--p",
        "4",
        "--probes",
        "constant,random,cap",
        "--random-trials",
        "8",
        "--seed",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let text = read(&csv);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .collect();
    // Header plus one row per probe.
    assert!(rows.len() >= 4, "{text}");
    assert!(text.starts_with("# config:"));
    assert!(csv.with_extension("plot.py").exists());
}

#[test]
fn sweep_dirichlet_slope_quarter() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let code = run(args(&[
        "sweep",
        "--manifold",
        "dirichlet",
        "--d",
        "1",
        "--R",
        "64,128,256,512",
        "--method",
        "fullgrid",
        "--p",
        "4",
        "--probe",
        "constant",
        "--out",
        csv.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let summary = read(&csv.with_extension("summary.csv"));
    let line = summary
        .lines()
        .find(|l| l.starts_with("constant,"))
        .expect("summary row");
    let slope: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((slope - 0.25).abs() < 0.05, "slope {slope}");
}

#[test]
fn oracle_cross_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("oracle.csv");
    let code = run(args(&[
        "oracle",
        "--sets",
        "5",
        "--max-points",
        "16",
        "--samples",
        "50000",
        "--seed",
        "3",
        "--out",
        csv.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    assert!(read(&csv).lines().count() >= 8);
}

#[test]
fn experiment_concentration_and_kptail() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("conc.csv");
    let code = run(args(&[
        "experiment",
        "--kind",
        "concentration",
        "--m",
        "200",
        "--delta",
        "0.2",
        "--trials",
        "500",
        "--seed",
        "2",
        "--out",
        csv.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    assert!(read(&csv).contains("trial,size,accepted"));

    let tail = dir.path().join("tail.csv");
    let code = run(args(&[
        "experiment",
        "--kind",
        "kptail",
        "--manifold",
        "momentcurve",
        "--d",
        "2",
        "--R",
        "64",
        "--q",
        "2",
        "--p",
        "6",
        "--trials",
        "30",
        "--seed",
        "4",
        "--out",
        tail.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    assert!(tail.with_extension("exceedance.csv").exists());
}

#[test]
fn diagnose_necessity_and_interference() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("grid.json");
    assert_eq!(
        run(args(&[
            "build",
            "--manifold",
            "momentcurve",
            "--d",
            "2",
            "--R",
            "128",
            "--method",
            "fullgrid",
            "--out",
            set.to_str().unwrap(),
        ])),
        0
    );
    let out = dir.path().join("diag.csv");
    assert_eq!(
        run(args(&[
            "diagnose",
            "--set",
            set.to_str().unwrap(),
            "--kind",
            "necessity",
            "--p",
            "4",
            "--beta",
            "1/2",
            "--out",
            out.to_str().unwrap(),
        ])),
        0
    );
    assert!(read(&out).contains("necessity"));
    assert_eq!(
        run(args(&[
            "diagnose",
            "--set",
            set.to_str().unwrap(),
            "--kind",
            "interference",
            "--out",
            out.to_str().unwrap(),
        ])),
        0
    );
    assert!(read(&out).contains("interference"));
}

#[test]
fn every_build_method_produces_a_set() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &[
            "--manifold",
            "paraboloid",
            "--d",
            "3",
            "--R",
            "16",
            "--method",
            "fullgrid",
        ],
        &[
            "--manifold",
            "paraboloid",
            "--d",
            "3",
            "--R",
            "16",
            "--method",
            "squares",
        ],
        &[
            "--manifold",
            "hyperbolic",
            "--d",
            "3",
            "--R",
            "16",
            "--method",
            "hyperbolic",
        ],
        &[
            "--manifold",
            "momentcurve",
            "--d",
            "3",
            "--R",
            "4096",
            "--method",
            "moment",
        ],
        &[
            "--manifold",
            "momentcurve",
            "--d",
            "2",
            "--R",
            "1024",
            "--method",
            "smallcap",
            "--p",
            "5",
        ],
        &[
            "--manifold",
            "paraboloid",
            "--d",
            "3",
            "--R",
            "16",
            "--method",
            "select",
            "--p",
            "4",
        ],
    ];
    for (i, case) in cases.iter().enumerate() {
        let out = dir.path().join(format!("set{i}.json"));
        let mut argv = vec!["build"];
        argv.extend_from_slice(case);
        argv.extend_from_slice(&["--seed", "5", "--out", out.to_str().unwrap()]);
        assert_eq!(run(args(&argv)), 0, "method case {case:?}");
        let fs = lambda_lab_core::io::load_set(&out).unwrap();
        assert!(!fs.is_empty());
    }
}

#[test]
fn rerunning_a_config_reproduces_numeric_output() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = |name: &str| {
        let csv = dir.path().join(name);
        assert_eq!(
            run(args(&[
                "sweep",
                "--manifold",
                "momentcurve",
                "--d",
                "2",
                "--R",
                "16,64,256",
                "--method",
                "capwise",
                "--p",
                "6",
                "--probe",
                "constant,random",
                "--random-trials",
                "4",
                "--seed",
                "9",
                "--out",
                csv.to_str().unwrap(),
            ])),
            0
        );
        csv
    };
    let a = sweep("a.csv");
    let b = sweep("b.csv");
    // Data rows identical modulo the wall-clock column (8th of the kp
    // schema); headers differ only in the --out path baked into the
    // config echo.
    let strip = |p: &std::path::Path| {
        read(p)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| {
                if l.starts_with("set_id") {
                    l.to_string()
                } else {
                    let mut cols: Vec<&str> = l.split(',').collect();
                    if cols.len() > 7 {
                        cols[7] = "-";
                    }
                    cols.join(",")
                }
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(
        strip(&a.with_extension("summary.csv")),
        strip(&b.with_extension("summary.csv"))
    );
}

#[test]
fn exit_codes_follow_the_contract() {
    // Unknown flag: usage error 1.
    assert_eq!(run(args(&["build", "--nonsense"])), 1);
    // Unknown subcommand: 1.
    assert_eq!(run(args(&["frobnicate"])), 1);
    // Schema mismatch on load: usage error.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"schema":"fset/2","kind":"moment_curve","d":2,"m":1,"R":4,
            "provenance":{"method":"x"},"points":[[0]]}"#,
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    assert_eq!(
        run(args(&[
            "estimate",
            "--set",
            bad.to_str().unwrap(),
            "--p",
            "4",
            "--out",
            out.to_str().unwrap(),
        ])),
        1
    );
    // Validation failure: squares_build on an inadmissible scale is a
    // usage error, but a retry exhaustion maps to 2; easiest determinate
    // validation failure is an impossible window, via a tiny budget
    // hyperbolic run is heavy, so check the mapping with moment at a
    // scale whose arcs are empty.
    let set = dir.path().join("never.json");
    let code = run(args(&[
        "build",
        "--manifold",
        "momentcurve",
        "--d",
        "2",
        "--R",
        "63",
        "--method",
        "capwise",
        "--seed",
        "1",
        "--out",
        set.to_str().unwrap(),
    ]));
    // 63 is not a perfect square: usage error.
    assert_eq!(code, 1);
}
