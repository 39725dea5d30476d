use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::{tempdir, TempDir};

const BIN_HZ: f64 = 22050.0 / 1024.0;

fn pitchfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pitchfuse")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = pitchfuse(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn write(&self, name: &str, text: &str) -> String {
        fs::write(self.path(name), text).unwrap();
        self.s(name)
    }
}

fn frame_time(t: usize) -> f64 {
    (t * 256 + 512) as f64 / 22050.0
}

fn cell(f: f64) -> String {
    if f.is_nan() {
        String::new()
    } else {
        format!("{f:.4}")
    }
}

fn constant_csv(frames: usize, f0: f64) -> String {
    let mut text = String::from("time_sec,f0_hz\n");
    for t in 0..frames {
        text += &format!("{:.6},{f0:.4}\n", frame_time(t));
    }
    text
}

#[test]
fn help_and_version_exit_zero() {
    let out = pitchfuse(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let help = String::from_utf8(out.stdout).unwrap();
    for sub in ["pyin", "multif0", "fuse", "eval", "synth", "plot"] {
        assert!(help.contains(sub), "{sub} missing from help");
    }
    assert_eq!(pitchfuse(&["--version"]).status.code(), Some(0));
    assert_eq!(pitchfuse(&["fuse", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["transcribe"][..],
        &["pyin"],
        &["eval", "x.csv", "--bogus"],
        &["multif0", "in.wav", "-o", "o.csv", "--polyphony", "0"],
        &["multif0", "in.wav", "-o", "o.csv", "--threshold", "1.5"],
        &["--window", "1000", "eval", "x.csv"],
    ] {
        let out = pitchfuse(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn runtime_errors_exit_two() {
    let dir = Dir::new();
    let out = pitchfuse(&["eval", &dir.s("missing.csv")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let bad = dir.write("bad.csv", "time_sec,f0_hz\n0.0,abc\n");
    assert_eq!(pitchfuse(&["eval", &bad]).status.code(), Some(2));

    let not_wav = dir.write("x.wav", "not audio");
    assert_eq!(pitchfuse(&["pyin", &not_wav, "-o", &dir.s("o.csv")]).status.code(), Some(2));
}

#[test]
fn eval_constant_track() {
    let dir = Dir::new();
    let track = dir.write("c.csv", &constant_csv(50, 440.0));
    let out = ok(&["eval", &track]);
    assert!(out.contains("flatness=0.0000"), "{out}");
    assert!(out.contains("completeness=1.0000"), "{out}");
    assert!(!out.contains("raw_pitch_accuracy"));

    let reference = dir.write("r.csv", &constant_csv(50, 452.0));
    let out = ok(&["eval", &track, "--ref", &reference]);
    assert!(out.contains("raw_pitch_accuracy=1.0000"), "{out}");
    let far = dir.write("far.csv", &constant_csv(50, 470.0));
    let out = ok(&["eval", &track, "--ref", &far]);
    assert!(out.contains("raw_pitch_accuracy=0.0000"), "{out}");
}

/// Fusion with default parameters, frame by frame; NaN marks unvoiced.
fn fused_oracle(m1: &[f64], p: &[f64]) -> Vec<f64> {
    let bin = |f: f64| (f / BIN_HZ).round() as i64;
    let n = m1.len() as i64;
    (0..n)
        .map(|t| {
            let (m, q) = (m1[t as usize], p[t as usize]);
            let quiet = (t - 5..=t + 4).all(|j| j < 0 || j >= n || m1[j as usize].is_nan());
            match (m.is_nan(), q.is_nan()) {
                (false, false) if (bin(q) - bin(m)).abs() <= 2 => q,
                (false, _) => m,
                (true, _) if quiet => q,
                _ => f64::NAN,
            }
        })
        .collect()
}

#[test]
fn fuse_matches_oracle_byte_for_byte() {
    let dir = Dir::new();
    let alphabet = [f64::NAN, 20.0 * BIN_HZ, 21.0 * BIN_HZ, 22.0 * BIN_HZ, 25.0 * BIN_HZ];
    for seed in 0..6 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frames = rng.random_range(20..60);
        // Runs of equal values so that long gaps and voiced stretches appear.
        let runs = |rng: &mut ChaCha8Rng| {
            let mut v = Vec::new();
            while v.len() < frames {
                let f = alphabet[rng.random_range(0..alphabet.len())];
                v.extend(std::iter::repeat_n(f, rng.random_range(1..14)));
            }
            v.truncate(frames);
            // Round through the CSV precision so inputs and oracle agree.
            v.into_iter().map(|f: f64| if f.is_nan() { f } else { cell(f).parse().unwrap() }).collect::<Vec<f64>>()
        };
        let m1 = runs(&mut rng);
        let voice2 = runs(&mut rng);
        let p = runs(&mut rng);

        let mut m_csv = String::from("time_sec,f0_1,f0_2\n");
        let mut p_csv = String::from("time_sec,f0_hz\n");
        for t in 0..frames {
            m_csv += &format!("{:.6},{},{}\n", frame_time(t), cell(m1[t]), cell(voice2[t]));
            p_csv += &format!("{:.6},{}\n", frame_time(t), cell(p[t]));
        }
        let fused = fused_oracle(&m1, &p);
        let mut expected = String::from("time_sec,f0_1,f0_2\n");
        for t in 0..frames {
            expected += &format!("{:.6},{},{}\n", frame_time(t), cell(fused[t]), cell(voice2[t]));
        }

        let m_path = dir.write("m.csv", &m_csv);
        let p_path = dir.write("p.csv", &p_csv);
        ok(&["fuse", "--m1", &m_path, "--pyin", &p_path, "-o", &dir.s("f.csv")]);
        assert_eq!(fs::read_to_string(dir.path("f.csv")).unwrap(), expected, "seed {seed}");
    }
}

#[test]
fn fuse_tolerance_flag() {
    let dir = Dir::new();
    let m = dir.write("m.csv", &constant_csv(20, 20.0 * BIN_HZ).replace("f0_hz", "f0_1"));
    let p = dir.write("p.csv", &constant_csv(20, 25.0 * BIN_HZ));
    let first = |path: &Path| fs::read_to_string(path).unwrap().lines().nth(1).unwrap().split(',').nth(1).unwrap().to_string();

    ok(&["fuse", "--m1", &m, "--pyin", &p, "-o", &dir.s("a.csv")]);
    assert_eq!(first(&dir.path("a.csv")), cell(20.0 * BIN_HZ));
    ok(&["fuse", "--m1", &m, "--pyin", &p, "-o", &dir.s("b.csv"), "--bin-tolerance", "5"]);
    assert_eq!(first(&dir.path("b.csv")), cell(25.0 * BIN_HZ));
}

fn time_column(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().to_string())
        .collect()
}

#[test]
fn synth_then_track_round_trip() {
    let dir = Dir::new();
    let contour = dir.write("c.csv", &constant_csv(120, 330.0));
    ok(&["synth", "--f0", &contour, "--partials", "1,0.5,0.25", "-o", &dir.s("tone.wav")]);
    ok(&["pyin", &dir.s("tone.wav"), "-o", &dir.s("p.csv")]);
    ok(&["multif0", &dir.s("tone.wav"), "-o", &dir.s("m.csv")]);

    let times = time_column(&dir.path("p.csv"));
    assert!(!times.is_empty());
    assert_eq!(times, time_column(&dir.path("m.csv")));
    assert_eq!(times[0], "0.023220");

    let reference = dir.write("ref.csv", &constant_csv(times.len(), 330.0));
    let out = ok(&["eval", &dir.s("p.csv"), "--ref", &reference]);
    let rpa: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("raw_pitch_accuracy="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(rpa > 0.95, "{out}");

    let header = fs::read_to_string(dir.path("m.csv")).unwrap();
    assert!(header.starts_with("time_sec,f0_1"));
}

#[test]
fn analysis_flags_change_the_grid() {
    let dir = Dir::new();
    let contour = dir.write("c.csv", &constant_csv(80, 220.0));
    ok(&["synth", "--f0", &contour, "-o", &dir.s("tone.wav")]);
    ok(&["--hop", "128", "pyin", &dir.s("tone.wav"), "-o", &dir.s("p.csv")]);
    let times = time_column(&dir.path("p.csv"));
    let step: f64 = times[1].parse::<f64>().unwrap() - times[0].parse::<f64>().unwrap();
    assert!((step - 128.0 / 22050.0).abs() < 2e-6, "{step}");
}

#[test]
fn plot_writes_svg_with_legend() {
    let dir = Dir::new();
    let a = dir.write("lead.csv", &constant_csv(40, 440.0));
    let m = dir.write("poly.csv", &constant_csv(40, 220.0).replace("f0_hz", "f0_1").replace('\n', ",330.0000\n").replacen(",330.0000", ",f0_2", 1));
    ok(&["synth", "--f0", &a, "-o", &dir.s("tone.wav")]);
    ok(&["plot", &a, &m, "--spec", &dir.s("tone.wav"), "-o", &dir.s("out.svg")]);
    let svg = fs::read_to_string(dir.path("out.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(svg.matches("class=\"legend\"").count(), 3, "{svg}");
    for label in ["lead", "poly:f0_1", "poly:f0_2"] {
        assert!(svg.contains(label), "{label}");
    }
}
