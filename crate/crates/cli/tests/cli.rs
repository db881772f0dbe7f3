use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use musnoise::audio::{load_wav, save_wav, AudioBuffer, SampleFormat};
use musnoise::synth::{harp_arpeggio, speech_over_background, Background};
use serde_json::Value;
use tempfile::TempDir;

fn musnoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_musnoise")).args(args).env_remove("MUSNOISE_JOBS").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, buf: &AudioBuffer) -> PathBuf {
    let p = dir.path().join(name);
    save_wav(&p, buf, SampleFormat::Float32).unwrap();
    p
}

fn harp(dir: &TempDir) -> PathBuf {
    write(dir, "harp.wav", &AudioBuffer::mono(harp_arpeggio(3.0, 48_000, 2), 48_000).unwrap())
}

fn distort(input: &Path, output: &Path, percent: &str, seed: &str) {
    let out = musnoise(&["distort", path_str(input), path_str(output), "--percent", percent, "--seed", seed]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn identical_files_score_zero() {
    let dir = TempDir::new().unwrap();
    let x = harp(&dir);
    let out = musnoise(&["measure", path_str(&x), path_str(&x)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "musnoise.measure/1");
    let measures = v["measures"].as_object().unwrap();
    assert_eq!(measures.len(), 4);
    for (id, m) in measures {
        assert_eq!(m["scaled"].as_f64(), Some(0.0), "{id}");
        assert_eq!(m["raw"].as_f64(), Some(0.0), "{id}");
    }
}

#[test]
fn distorted_harp_is_caught_by_subband_measure_only() {
    let dir = TempDir::new().unwrap();
    let x = harp(&dir);
    let (clean, holes) = (dir.path().join("p0.wav"), dir.path().join("p50.wav"));
    distort(&x, &clean, "0", "1");
    distort(&x, &holes, "50", "1");
    let v = json(&musnoise(&["measure", path_str(&clean), path_str(&holes), "--measures", "delta_kurt,delta_kurt_pi"]));
    let pi = v["measures"]["delta_kurt_pi"]["scaled"].as_f64().unwrap();
    let dk = v["measures"]["delta_kurt"]["scaled"].as_f64().unwrap();
    assert!(pi > dk, "pi {pi} dk {dk}");
    assert!(v["measures"]["delta_kurt_pi"]["band"]["index"].is_u64());
}

#[test]
fn missing_input_exits_2_without_output() {
    let out = musnoise(&["measure", "/no/such/ref.wav", "/no/such/proc.wav"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(musnoise(&["measure", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(musnoise(&["distort", "a.wav", "b.wav", "--percent", "150"]).status.code(), Some(2));
    assert_eq!(musnoise(&["measure", "a.wav", "b.wav", "--measures", "kurt"]).status.code(), Some(2));
    let zero_jobs = Command::new(env!("CARGO_BIN_EXE_musnoise"))
        .args(["respond", "--synthetic", "1"])
        .env("MUSNOISE_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(zero_jobs.status.code(), Some(2));
}

#[test]
fn masks_select_noise_frames() {
    let dir = TempDir::new().unwrap();
    let x = harp(&dir);
    let holes = dir.path().join("p50.wav");
    distort(&x, &holes, "50", "4");
    let frames = musnoise::stft::StftConfig::default().num_frames(load_wav(&holes).unwrap().len());

    let all_active = dir.path().join("active.txt");
    std::fs::write(&all_active, "1 ".repeat(frames)).unwrap();
    let out = musnoise(&["measure", path_str(&x), path_str(&holes), "--mask", path_str(&all_active)]);
    assert_eq!(out.status.code(), Some(1));

    let wrong_len = dir.path().join("short.txt");
    std::fs::write(&wrong_len, "# too short\n0 0 0\n").unwrap();
    let out = musnoise(&["measure", path_str(&x), path_str(&holes), "--mask", path_str(&wrong_len)]);
    assert_eq!(out.status.code(), Some(2));

    let silent = write(&dir, "silent.wav", &AudioBuffer::mono(vec![0.0; 48_000 * 3], 48_000).unwrap());
    let plain = json(&musnoise(&["measure", path_str(&x), path_str(&holes)]));
    let gated = json(&musnoise(&["measure", path_str(&x), path_str(&holes), "--target", path_str(&silent)]));
    assert_eq!(gated["frames"], "noise_only");
    assert_eq!(plain["measures"], gated["measures"]);
}

#[test]
fn distort_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let x = harp(&dir);
    let (a, b, c) = (dir.path().join("a.wav"), dir.path().join("b.wav"), dir.path().join("c.wav"));
    distort(&x, &a, "30", "9");
    distort(&x, &b, "30", "9");
    distort(&x, &c, "30", "10");
    let (a, b, c) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), std::fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn distort_endpoints() {
    let dir = TempDir::new().unwrap();
    let x = harp(&dir);
    let (p0, p998) = (dir.path().join("p0.wav"), dir.path().join("p998.wav"));
    distort(&x, &p0, "0", "0");
    distort(&x, &p998, "99.8", "0");
    let orig = load_wav(&x).unwrap();
    let (p0, p998) = (load_wav(&p0).unwrap(), load_wav(&p998).unwrap());
    let energy = |b: &AudioBuffer, r: std::ops::Range<usize>| b.channel(0).unwrap()[r].iter().map(|v| v * v).sum::<f64>();
    let interior = 1024..p0.len() - 1024;
    let err: f64 = interior.clone().map(|i| (orig.channel(0).unwrap()[i] - p0.channel(0).unwrap()[i]).powi(2)).sum();
    assert!(10.0 * (err / energy(&orig, interior.clone())).log10() < -60.0);
    assert!(energy(&p998, interior.clone()) < 0.01 * energy(&orig, interior));
}

#[test]
fn respond_requires_wav_items() {
    let dir = TempDir::new().unwrap();
    let out = musnoise(&["respond", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn respond_single_item_at_level_zero() {
    let dir = TempDir::new().unwrap();
    harp(&dir);
    let csv = dir.path().join("r.csv");
    let out = musnoise(&["respond", path_str(dir.path()), "--levels", "0", "--csv", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["items"], serde_json::json!(["harp"]));
    // a single level cannot be scored
    assert!(v["measures"]["delta_kurt_pi"]["score"].is_null());

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema: musnoise.responses/1"));
    assert_eq!(lines.next(), Some("item,level,measure,value"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.starts_with("harp,0,") && r.ends_with(",0")));
}

#[test]
fn respond_ranks_subband_measure_first_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let items = dir.path().join("items");
    std::fs::create_dir(&items).unwrap();
    for (i, kind) in [Background::Pink, Background::Wind, Background::Pad, Background::Rain, Background::Babble]
        .into_iter()
        .enumerate()
    {
        let buf = speech_over_background(kind, 5.0, 3.0, 48_000, i as u64);
        save_wav(items.join(format!("{i}.wav")), &buf, SampleFormat::Float32).unwrap();
    }
    let args = ["respond", path_str(&items), "--seed", "5", "--measures", "delta_kurt,delta_kurt_w,delta_kurt_pi"];
    let first = musnoise(&args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let v = json(&first);
    let rho = |id: &str| v["measures"][id]["score"]["rho"].as_f64().unwrap();
    assert!(rho("delta_kurt_pi") > rho("delta_kurt"));
    assert!(rho("delta_kurt_pi") > rho("delta_kurt_w"));

    let mut threaded = args.to_vec();
    threaded.extend(["--jobs", "3"]);
    assert_eq!(musnoise(&threaded).stdout, first.stdout);
}

fn write_text(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn correlate_reports_known_values() {
    let dir = TempDir::new().unwrap();
    let scores = write_text(&dir, "scores.csv", "item,score,reference\na,1,0\nb,2,0\nc,3,false\nd,4,no\nref,100,1\n");
    let wide = write_text(
        &dir,
        "wide.csv",
        "item,delta_kurt,delta_kurt_w,delta_kurt_pi\na,1,-1,2\nb,2,-2,1\nc,3,-3,4\nd,4,-4,3\nref,0,0,0\n",
    );
    let out = musnoise(&["correlate", path_str(&scores), path_str(&wide)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["schema"], "musnoise.correlate/1");
    let m = &v["measures"];
    let near = |id: &str, key: &str, want: f64| (m[id][key].as_f64().unwrap() - want).abs() < 1e-12;
    assert!(near("delta_kurt", "pearson_r", 1.0) && near("delta_kurt", "kendall_t", 1.0));
    assert!(near("delta_kurt_w", "pearson_r", -1.0) && near("delta_kurt_w", "kendall_t", -1.0));
    assert!(near("delta_kurt_pi", "pearson_r", 0.6));
    assert_eq!(m["delta_kurt_pi"]["excluded"], serde_json::json!(["ref"]));
    assert_eq!(m["delta_kurt_pi"]["n"], 4);

    let long = write_text(&dir, "long.csv", "# schema: musnoise.x\nitem,measure,value\na,delta_kurt_pi,2\nb,delta_kurt_pi,1\nc,delta_kurt_pi,4\nd,delta_kurt_pi,3\n");
    let v = json(&musnoise(&["correlate", path_str(&scores), path_str(&long)]));
    assert!((v["measures"]["delta_kurt_pi"]["pearson_r"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert_eq!(v["unmatched"], serde_json::json!(["ref"]));
}

#[test]
fn correlate_needs_three_pairs() {
    let dir = TempDir::new().unwrap();
    let scores = write_text(&dir, "scores.csv", "item,score\na,1\nb,2\nc,3\n");
    let values = write_text(&dir, "m.csv", "item,delta_kurt\na,1\nb,2\nzz,3\n");
    let out = musnoise(&["correlate", path_str(&scores), path_str(&values)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}
