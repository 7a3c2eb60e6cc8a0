//! End-to-end checks of the glyphfit binary: file formats, exit codes,
//! determinism, interpolation endpoints.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_glyphfit"))
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../glyphfit/tests/corpus")
        .join(format!("{name}.svg"))
}

fn run_ok(cmd: &mut Command) {
    let out = cmd.output().expect("spawn glyphfit");
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn sdf_gen_writes_expected_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("g");
    run_ok(bin().args([
        "sdf-gen",
        corpus("sans_l").to_str().unwrap(),
        "-o",
        prefix.to_str().unwrap(),
    ]));
    // 128 x 128 grid: 16,384 little-endian f32 samples after the header
    let sdf = std::fs::read(prefix.with_extension("sdf")).unwrap();
    assert!(sdf.starts_with(b"SDF1 128 128\n"));
    assert_eq!(sdf.len(), b"SDF1 128 128\n".len() + 128 * 128 * 4);
    let sdc = std::fs::read(prefix.with_extension("sdc")).unwrap();
    assert!(sdc.starts_with(b"SDC1 4000\n"));
    assert_eq!(sdc.len(), b"SDC1 4000\n".len() + 4000 * 12);
    let pgm = std::fs::read(prefix.with_extension("pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n128 128\n255\n"));
}

#[test]
fn sdf_gen_grid_flag_changes_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("g64");
    run_ok(bin().args([
        "sdf-gen",
        corpus("sans_l").to_str().unwrap(),
        "-o",
        prefix.to_str().unwrap(),
        "--grid",
        "64",
    ]));
    let sdf = std::fs::read(prefix.with_extension("sdf")).unwrap();
    assert!(sdf.starts_with(b"SDF1 64 64\n"));
    assert_eq!(sdf.len(), b"SDF1 64 64\n".len() + 64 * 64 * 4);
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.svg");
    std::fs::write(&bad, "<svg><path d=\"M 0 0 A 1 1 0 0 0 2 2 Z\"/></svg>").unwrap();
    let out = bin()
        .args([
            "sdf-gen",
            bad.to_str().unwrap(),
            "-o",
            dir.path().join("x").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported"));
}

#[test]
fn pipeline_is_deterministic_and_renders() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("glyph");
    run_ok(bin().args([
        "sdf-gen",
        corpus("sans_v").to_str().unwrap(),
        "-o",
        prefix.to_str().unwrap(),
        "--grid",
        "64",
        "--mc",
        "500",
        "--seed",
        "3",
    ]));

    let fit_args = |out: &Path| {
        vec![
            "fit".to_string(),
            prefix.to_str().unwrap().to_string(),
            "-o".to_string(),
            out.to_str().unwrap().to_string(),
            "--steps".to_string(),
            "50".to_string(),
            "--np".to_string(),
            "6".to_string(),
            "--na".to_string(),
            "4".to_string(),
            "--seed".to_string(),
            "3".to_string(),
        ]
    };
    let pfd1 = dir.path().join("a.pfd");
    let pfd2 = dir.path().join("b.pfd");
    run_ok(bin().args(fit_args(&pfd1)));
    run_ok(bin().args(fit_args(&pfd2)));
    let b1 = std::fs::read(&pfd1).unwrap();
    let b2 = std::fs::read(&pfd2).unwrap();
    assert_eq!(b1, b2, "refit with the same seed must be byte-identical");

    // report has one line per step
    let report = std::fs::read_to_string(pfd1.with_extension("report")).unwrap();
    assert_eq!(report.lines().count(), 50);

    let svg1 = dir.path().join("a.svg");
    let svg2 = dir.path().join("b.svg");
    run_ok(bin().args([
        "vectorize",
        pfd1.to_str().unwrap(),
        "-o",
        svg1.to_str().unwrap(),
    ]));
    run_ok(bin().args([
        "vectorize",
        pfd2.to_str().unwrap(),
        "-o",
        svg2.to_str().unwrap(),
    ]));
    assert_eq!(
        std::fs::read(&svg1).unwrap(),
        std::fs::read(&svg2).unwrap(),
        "vectorization must be deterministic"
    );

    // render at a different resolution still works (implicit form)
    let pgm = dir.path().join("r.pgm");
    run_ok(bin().args([
        "render",
        pfd1.to_str().unwrap(),
        "-o",
        pgm.to_str().unwrap(),
        "--size",
        "256",
    ]));
    let bytes = std::fs::read(&pgm).unwrap();
    assert!(bytes.starts_with(b"P5\n256 256\n255\n"));
}

#[test]
fn render_empty_field_is_all_background() {
    let dir = tempfile::tempdir().unwrap();
    // a field whose single curve is positive everywhere
    let pfd = dir.path().join("empty.pfd");
    let mut bytes = b"PFD1 1 1\n".to_vec();
    for v in [1.0f32, 0.0, 1.0, 0.0, 0.0, 10.0] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(&pfd, bytes).unwrap();
    let out = dir.path().join("empty.pgm");
    run_ok(bin().args([
        "render",
        pfd.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--size",
        "64",
    ]));
    let pgm = std::fs::read(&out).unwrap();
    let header = b"P5\n64 64\n255\n";
    assert!(pgm.starts_with(header));
    assert!(pgm[header.len()..].iter().all(|&b| b == 255));
}

#[test]
fn high_resolution_render_keeps_sharp_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("s");
    run_ok(bin().args([
        "sdf-gen",
        corpus("sans_l").to_str().unwrap(),
        "-o",
        prefix.to_str().unwrap(),
        "--grid",
        "64",
        "--mc",
        "500",
    ]));
    let pfd = dir.path().join("s.pfd");
    run_ok(bin().args([
        "fit",
        prefix.to_str().unwrap(),
        "-o",
        pfd.to_str().unwrap(),
        "--steps",
        "200",
    ]));
    let out = dir.path().join("s512.pgm");
    run_ok(bin().args([
        "render",
        pfd.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--size",
        "512",
    ]));
    let pgm = std::fs::read(&out).unwrap();
    let px = &pgm[b"P5\n512 512\n255\n".len()..];
    let gray = px.iter().filter(|&&b| b != 0 && b != 255).count();
    let ink = px.iter().filter(|&&b| b == 0).count();
    // the transfer's transition band is ~gamma wide: a thin rim, no blur
    assert!(ink > 10_000, "ink pixels: {ink}");
    assert!(
        (gray as f64) < 0.05 * px.len() as f64,
        "gray fraction too high: {gray} of {}",
        px.len()
    );
}

#[test]
fn report_single_step() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("one");
    run_ok(bin().args([
        "sdf-gen",
        corpus("sans_l").to_str().unwrap(),
        "-o",
        prefix.to_str().unwrap(),
        "--grid",
        "32",
        "--mc",
        "100",
    ]));
    let pfd = dir.path().join("one.pfd");
    run_ok(bin().args([
        "fit",
        prefix.to_str().unwrap(),
        "-o",
        pfd.to_str().unwrap(),
        "--steps",
        "1",
        "--np",
        "2",
        "--na",
        "3",
    ]));
    let report = std::fs::read_to_string(pfd.with_extension("report")).unwrap();
    assert_eq!(report.lines().count(), 1);
    assert!(report.starts_with("1 "));
}

#[test]
fn diverging_fit_exits_3_with_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("d");
    run_ok(bin().args([
        "sdf-gen",
        corpus("sans_l").to_str().unwrap(),
        "-o",
        prefix.to_str().unwrap(),
        "--grid",
        "32",
        "--mc",
        "100",
    ]));
    let pfd = dir.path().join("d.pfd");
    let out = bin()
        .args([
            "fit",
            prefix.to_str().unwrap(),
            "-o",
            pfd.to_str().unwrap(),
            "--steps",
            "20",
            "--np",
            "2",
            "--na",
            "3",
            "--lr",
            "1e308",
            "--lr-final",
            "1e308",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(pfd.with_extension("report")).unwrap();
    assert!(!report.is_empty(), "partial report must be written");
}

#[test]
fn interp_endpoints_and_midpoint() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("i");
    run_ok(bin().args([
        "sdf-gen",
        corpus("sans_l").to_str().unwrap(),
        "-o",
        prefix.to_str().unwrap(),
        "--grid",
        "32",
        "--mc",
        "100",
    ]));
    let a = dir.path().join("a.pfd");
    let b = dir.path().join("b.pfd");
    run_ok(bin().args([
        "fit", prefix.to_str().unwrap(), "-o", a.to_str().unwrap(),
        "--steps", "5", "--np", "2", "--na", "3", "--seed", "1",
    ]));
    run_ok(bin().args([
        "fit", prefix.to_str().unwrap(), "-o", b.to_str().unwrap(),
        "--steps", "5", "--np", "2", "--na", "3", "--seed", "2",
    ]));

    let out = dir.path().join("out.pfd");
    run_ok(bin().args([
        "interp", a.to_str().unwrap(), b.to_str().unwrap(), "0",
        "-o", out.to_str().unwrap(),
    ]));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&a).unwrap());
    run_ok(bin().args([
        "interp", a.to_str().unwrap(), b.to_str().unwrap(), "1",
        "-o", out.to_str().unwrap(),
    ]));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&b).unwrap());
    // lambda = 0.5 with A = B returns A
    run_ok(bin().args([
        "interp", a.to_str().unwrap(), a.to_str().unwrap(), "0.5",
        "-o", out.to_str().unwrap(),
    ]));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&a).unwrap());
}

#[test]
fn interp_shape_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("m");
    run_ok(bin().args([
        "sdf-gen",
        corpus("sans_l").to_str().unwrap(),
        "-o",
        prefix.to_str().unwrap(),
        "--grid",
        "32",
        "--mc",
        "100",
    ]));
    let a = dir.path().join("a.pfd");
    let b = dir.path().join("b.pfd");
    run_ok(bin().args([
        "fit", prefix.to_str().unwrap(), "-o", a.to_str().unwrap(),
        "--steps", "2", "--np", "2", "--na", "3",
    ]));
    run_ok(bin().args([
        "fit", prefix.to_str().unwrap(), "-o", b.to_str().unwrap(),
        "--steps", "2", "--np", "3", "--na", "3",
    ]));
    let out = bin()
        .args([
            "interp", a.to_str().unwrap(), b.to_str().unwrap(), "0.5",
            "-o", dir.path().join("x.pfd").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfgfile = dir.path().join("run.cfg");
    std::fs::write(&cfgfile, "grid=32\nmc=100\nseed=5\n").unwrap();
    let prefix = dir.path().join("c");
    // config sets grid=32; the flag overrides mc
    run_ok(bin().args([
        "sdf-gen",
        corpus("sans_l").to_str().unwrap(),
        "-o",
        prefix.to_str().unwrap(),
        "--config",
        cfgfile.to_str().unwrap(),
        "--mc",
        "64",
    ]));
    let sdf = std::fs::read(prefix.with_extension("sdf")).unwrap();
    assert!(sdf.starts_with(b"SDF1 32 32\n"));
    let sdc = std::fs::read(prefix.with_extension("sdc")).unwrap();
    assert!(sdc.starts_with(b"SDC1 64\n"));
}

#[test]
fn multi_glyph_fit_with_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let mut prefixes = Vec::new();
    for name in ["sans_l", "sans_v"] {
        let prefix = dir.path().join(name);
        run_ok(bin().args([
            "sdf-gen",
            corpus(name).to_str().unwrap(),
            "-o",
            prefix.to_str().unwrap(),
            "--grid",
            "32",
            "--mc",
            "100",
        ]));
        prefixes.push(prefix);
    }
    let mut cmd = bin();
    cmd.arg("fit");
    for p in &prefixes {
        cmd.arg(p.to_str().unwrap());
    }
    cmd.args(["--steps", "5", "--np", "2", "--na", "3", "--jobs", "2"]);
    run_ok(&mut cmd);
    for p in &prefixes {
        assert!(p.with_extension("pfd").exists());
        assert!(p.with_extension("report").exists());
    }
}
