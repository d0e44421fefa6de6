use std::process::{Command, Output};

fn latrefine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latrefine")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn volumes_report_partition() {
    let o = latrefine(&["volumes", "--plan", "L0,L1,L2W"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for needle in ["125/1152", "451/6912", "0.0652488", "partition: OK"] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
}

#[test]
fn shells_match_simple_cubic_table() {
    let o = latrefine(&["shells", "--plan", "L0", "--class", "GAMMA", "--max-r2", "6"]);
    assert!(o.status.success());
    let rows: Vec<(String, String)> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| {
            let mut f = l.split('\t');
            (f.next().unwrap().to_string(), f.next().unwrap().to_string())
        })
        .collect();
    let want = [("1", "6"), ("2", "12"), ("3", "8"), ("4", "6"), ("5", "24"), ("6", "24")];
    assert_eq!(rows.len(), want.len());
    for ((r2, n), (wr2, wn)) in rows.iter().zip(want) {
        assert_eq!((r2.as_str(), n.as_str()), (wr2, wn));
    }
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = latrefine(&["verify", "--report", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(!text.contains("FAIL"));
    let json = std::fs::read_to_string(&path).unwrap();
    assert!(json.contains("\"all_pass\": true"));
    assert!(json.contains("\"451/6912\""));
}

#[test]
fn output_is_deterministic() {
    let args = ["cell", "--plan", "L0,L1,L2W,L3", "--class", "LAMBDA"];
    let a = latrefine(&args);
    let b = latrefine(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("volume: 26291/884736 (0.0297162)"));
    assert!(text.contains("V=12 E=21 F=11"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["volumes", "--plan", "L0,L2W"][..],
        &["cell", "--plan", "L0", "--class", "W"],
        &["cell", "--plan", "L0", "--class", "Q"],
        &["volumes", "--plan", "L0", "--bogus"],
        &["verify", "--grid-n", "50"],
        &["export-assembly", "--plan", "L0,L1", "--figure", "level3-bridge", "x.off"],
        &["planar", "--kind", "hexagonal"],
    ] {
        let o = latrefine(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn sites_in_unit_box() {
    let o = latrefine(&["sites", "--plan", "L0,L1,L2W"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 14);
    assert!(text.lines().any(|l| l == "W 0 1/4 1/2"));
    let o = latrefine(&["sites", "--plan", "L0", "--bbox", "0,0,0,2,2,2"]);
    assert_eq!(stdout(&o).lines().count(), 8);
}

#[test]
fn exports_follow_naming_convention() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = latrefine(&["cell", "--plan", "L0,L1,L2W,L3", "--class", "GAMMA", "--export", "stl", d]);
    assert!(o.status.success());
    let stl = std::fs::metadata(dir.path().join("L0-L1-L2W-L3_GAMMA.stl")).unwrap();
    assert_eq!(stl.len(), 484);

    for figure in ["bcc-three-cells", "level2-gamma-w", "level3-bridge", "level3-composite"] {
        let plan = match figure {
            "bcc-three-cells" => "L0,L1",
            "level2-gamma-w" => "L0,L1,L2W",
            _ => "L0,L1,L2W,L3",
        };
        let o = latrefine(&["export-assembly", "--plan", plan, "--figure", figure, d]);
        assert!(o.status.success(), "{figure}");
        let slug = plan.replace(',', "-");
        let text = std::fs::read_to_string(dir.path().join(format!("{slug}_{figure}_assembly.off"))).unwrap();
        assert!(text.starts_with("OFF\n"));
    }
    let file = dir.path().join("three.stl");
    let o = latrefine(&["export-assembly", "--plan", "L0,L1", "--figure", "bcc-three-cells", file.to_str().unwrap()]);
    assert!(o.status.success());
    // three truncated octahedra, 44 triangles each
    assert_eq!(std::fs::metadata(&file).unwrap().len(), 84 + 50 * 132);
}

#[test]
fn planar_square_rows() {
    let o = latrefine(&["planar", "--kind", "square", "--steps", "2"]);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("1\t1/2\t1/4\t0"));
    assert!(lines[3].starts_with("2\t1/4\t1/16\t0"));
}
