use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use stagetv_cli::io::{load_image, save_image};
use stagetv_cli::trace::{read_trace, read_trace_from, write_trace, write_trace_to, TraceRow};
use stagetv_core::{phantom, ImageGrid};

fn stagetv(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_stagetv")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pgm_and_png_round_trip_integer_images() {
    let dir = tempfile::tempdir().unwrap();
    let u = ImageGrid::from_fn(13, 17, |i, j| ((i * 31 + j * 7) % 256) as f64).unwrap();
    for name in ["u.pgm", "u.png"] {
        let p = dir.path().join(name);
        save_image(&u, &p).unwrap();
        assert_eq!(load_image(&p).unwrap(), u, "{name}");
    }
}

#[test]
fn saving_clamps_and_rounds() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("q.pgm");
    for (value, stored) in [(300.0, 255.0), (-5.0, 0.0), (127.5, 128.0), (127.49, 127.0)] {
        save_image(&ImageGrid::filled(2, 3, value), &p).unwrap();
        assert_eq!(load_image(&p).unwrap(), ImageGrid::filled(2, 3, stored), "{value}");
    }
}

#[test]
fn hand_written_pgm_loads_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tiny.pgm");
    std::fs::write(&p, b"P5\n2 2\n255\n\x00\x80\xff\x40").unwrap();
    assert_eq!(load_image(&p).unwrap().as_slice(), &[0.0, 128.0, 255.0, 64.0]);
    std::fs::write(&p, b"P5\n2 2\n255\n\x00\x80\xff").unwrap();
    assert!(load_image(&p).unwrap_err().to_string().contains("truncated"));
}

#[test]
fn color_png_is_converted_by_luma() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("rgb.png");
    let img = image::RgbImage::from_raw(2, 1, vec![255, 0, 0, 10, 20, 30]).unwrap();
    img.save(&p).unwrap();
    let g = load_image(&p).unwrap();
    assert!((g.get(0, 0) - 0.299 * 255.0).abs() < 1e-9);
    assert!((g.get(0, 1) - (0.299 * 10.0 + 0.587 * 20.0 + 0.114 * 30.0)).abs() < 1e-9);

    let p16 = dir.path().join("deep.png");
    image::ImageBuffer::<image::Luma<u16>, _>::from_raw(2, 2, vec![0u16, 1, 2, 3])
        .unwrap()
        .save(&p16)
        .unwrap();
    assert!(load_image(&p16).is_err());
}

fn row_strategy() -> impl Strategy<Value = TraceRow> {
    (
        1usize..20,
        1u8..=2,
        1usize..500,
        0.0f64..10.0,
        0.0f64..1e4,
        proptest::option::of(0.0f64..60.0),
        proptest::option::of(-1.0f64..1.0),
    )
        .prop_map(|(stage, sigma, iter, rel_err, residual, psnr, ssim)| TraceRow {
            stage,
            sigma,
            iter,
            rel_err,
            residual,
            psnr,
            ssim,
        })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 5e-9 * a.abs().max(b.abs()) + 1e-300
}

proptest! {
    #[test]
    fn trace_round_trips_to_nine_digits(rows in proptest::collection::vec(row_strategy(), 0..20)) {
        let mut buf = Vec::new();
        write_trace_to(&rows, &mut buf).unwrap();
        let back = read_trace_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert_eq!((a.stage, a.sigma, a.iter), (b.stage, b.sigma, b.iter));
            prop_assert!(close(a.rel_err, b.rel_err) && close(a.residual, b.residual));
            prop_assert_eq!(a.psnr.is_some(), b.psnr.is_some());
            prop_assert_eq!(a.ssim.is_some(), b.ssim.is_some());
            if let (Some(x), Some(y)) = (a.psnr, b.psnr) { prop_assert!(close(x, y)); }
            if let (Some(x), Some(y)) = (a.ssim, b.ssim) { prop_assert!(close(x, y)); }
        }
    }
}

#[test]
fn trace_with_short_values_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let rows = vec![TraceRow {
        stage: 2,
        sigma: 2,
        iter: 7,
        rel_err: 1.25e-7,
        residual: 310.5,
        psnr: Some(f64::INFINITY),
        ssim: Some(0.875),
    }];
    write_trace(&rows, &p).unwrap();
    assert_eq!(read_trace(&p).unwrap(), rows);
    std::fs::write(&p, "stage,iter\n1,1\n").unwrap();
    assert!(read_trace(&p).is_err());
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(stagetv(&[]).0, 1);
    assert_eq!(stagetv(&["frobnicate"]).0, 1);
    assert_eq!(stagetv(&["metrics", "--a", "x.png", "--bogus"]).0, 1);
    let (code, _, err) = stagetv(&["metrics", "--a", "/nonexistent/a.png", "--b", "/nonexistent/b.png"]);
    assert_eq!(code, 1);
    assert!(err.contains("/nonexistent/a.png"));
    let (code, out, _) = stagetv(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("restore"));
}

#[test]
fn numerical_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("u.pgm");
    let out = dir.path().join("out.pgm");
    save_image(&phantom::two_region(12, 12), &input).unwrap();
    let base = ["restore", "--in", path_str(&input), "--out", path_str(&out)];

    let (code, _, _) = stagetv(&[&base[..], &["--penalty", "0"]].concat());
    assert_eq!(code, 1, "invalid configuration is a usage error");

    // A very wide 3×3 Gaussian is a box filter, whose symbol vanishes at the
    // bins 2π/3 apart on a 12-pixel axis; a tiny penalty cannot fill them.
    let (code, _, err) =
        stagetv(&[&base[..], &["--blur-size", "3", "--blur-sigma", "1e6", "--penalty", "1e-20"]].concat());
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("singular"), "{err}");
}

#[test]
fn metrics_of_identical_images() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("u.png");
    save_image(&phantom::piecewise_constant(32, 32), &p).unwrap();
    let (code, out, _) = stagetv(&["metrics", "--a", path_str(&p), "--b", path_str(&p)]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["psnr"], "inf");
    assert_eq!(v["ssim"], 1.0);
    assert_eq!(v["fom"], 1.0);
}

#[test]
fn noiseless_degrade_reproduces_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.png");
    let f = dir.path().join("f.png");
    save_image(&phantom::mixed(24, 24), &u).unwrap();
    let (code, out, _) = stagetv(&["degrade", "--in", path_str(&u), "--out", path_str(&f), "--noise-sigma", "0"]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert_eq!(load_image(&f).unwrap(), load_image(&u).unwrap());
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.png.json")).unwrap()).unwrap();
    assert_eq!(sidecar["spec"]["noise_sigma"], 0.0);
    assert_eq!(sidecar["spec"]["blur"], serde_json::Value::Null);
}

#[test]
fn sidecar_replays_the_degradation() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.pgm");
    let f = dir.path().join("f.pgm");
    save_image(&phantom::smooth_quadratic(20, 20), &u).unwrap();
    let (code, _, _) = stagetv(&[
        "degrade", "--in", path_str(&u), "--out", path_str(&f), "--noise-sigma", "12", "--blur-size", "3", "--seed", "9",
    ]);
    assert_eq!(code, 0);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.pgm.json")).unwrap()).unwrap();
    let spec: stagetv_core::degrade::DegradeSpec = serde_json::from_value(sidecar["spec"].clone()).unwrap();
    assert_eq!(spec.seed, 9);
    assert_eq!(spec.blur.unwrap().sigma, 0.5);
    let replay = stagetv_core::degrade::degrade(&load_image(&u).unwrap(), &spec).unwrap();
    assert_eq!(replay.quantized(), load_image(&f).unwrap());
}

#[test]
fn stagewise_restore_reports_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.png");
    let f = dir.path().join("f.png");
    let r = dir.path().join("r.png");
    let t = dir.path().join("t.csv");
    save_image(&phantom::mixed(32, 32), &u).unwrap();
    stagetv(&["degrade", "--in", path_str(&u), "--out", path_str(&f), "--noise-sigma", "20", "--seed", "3"]);
    let (code, out, err) = stagetv(&[
        "restore", "--in", path_str(&f), "--out", path_str(&r), "--oracle", path_str(&u), "--trace", path_str(&t),
    ]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    let mut want = vec!["fom", "method", "psnr", "ssim", "stages", "termination", "total_iters"];
    want.sort();
    let mut got = keys.clone();
    got.sort();
    assert_eq!(got, want);
    assert_eq!(v["method"], "stagewise");

    let restored = load_image(&r).unwrap();
    let clean = load_image(&u).unwrap();
    let psnr = stagetv_core::metrics::psnr(&restored, &clean).unwrap();
    assert!((v["psnr"].as_f64().unwrap() - psnr).abs() < 1e-12);
    assert!(psnr > stagetv_core::metrics::psnr(&load_image(&f).unwrap(), &clean).unwrap());

    let rows = read_trace(&t).unwrap();
    assert!(rows.iter().all(|r| r.psnr.is_some() && r.ssim.is_some()));
    let mut stage_max: Vec<(usize, f64)> = Vec::new();
    for row in &rows {
        assert_eq!(row.sigma, if row.stage % 2 == 1 { 1 } else { 2 });
        match stage_max.last_mut() {
            Some((s, m)) if *s == row.stage => *m = m.max(row.psnr.unwrap()),
            _ => stage_max.push((row.stage, row.psnr.unwrap())),
        }
    }
    assert!(stage_max.windows(2).all(|w| w[1].1 >= w[0].1));
}

#[test]
fn rof_method_equals_one_stage_stagewise() {
    let dir = tempfile::tempdir().unwrap();
    let u = dir.path().join("u.pgm");
    let f = dir.path().join("f.pgm");
    save_image(&phantom::two_region(24, 24), &u).unwrap();
    stagetv(&["degrade", "--in", path_str(&u), "--out", path_str(&f), "--noise-sigma", "25", "--seed", "4"]);
    let a = dir.path().join("a.pgm");
    let b = dir.path().join("b.pgm");
    let (_, out_a, _) = stagetv(&["restore", "--in", path_str(&f), "--out", path_str(&a), "--method", "rof"]);
    let (_, out_b, _) =
        stagetv(&["restore", "--in", path_str(&f), "--out", path_str(&b), "--method", "stagewise", "--n-max", "1"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let (va, vb): (serde_json::Value, serde_json::Value) =
        (serde_json::from_str(&out_a).unwrap(), serde_json::from_str(&out_b).unwrap());
    assert_eq!(va["total_iters"], vb["total_iters"]);
    assert_eq!(va["psnr"], serde_json::Value::Null);
}
