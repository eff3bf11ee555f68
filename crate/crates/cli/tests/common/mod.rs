#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rtseval::fixtures::Fixture;
use rtseval::ingest::{emit_clusters, emit_epoch, emit_qrels, emit_run};
use rtseval::EpochMap;

/// An invocation of the binary under test, built up argument by argument.
#[derive(Clone, Debug, Default)]
pub struct Cli {
    args: Vec<String>,
}

pub fn cli(subcommand: &str) -> Cli {
    Cli::default().arg(subcommand)
}

impl Cli {
    pub fn arg(mut self, a: impl Into<String>) -> Self {
        self.args.push(a.into());
        self
    }

    pub fn args<S: Into<String>>(mut self, xs: impl IntoIterator<Item = S>) -> Self {
        self.args.extend(xs.into_iter().map(Into::into));
        self
    }

    /// Puts global flags such as `--jobs` in front of the subcommand.
    pub fn global<S: Into<String>>(mut self, xs: impl IntoIterator<Item = S>) -> Self {
        let mut head: Vec<String> = xs.into_iter().map(Into::into).collect();
        head.append(&mut self.args);
        self.args = head;
        self
    }

    pub fn argv(&self) -> &[String] {
        &self.args
    }

    pub fn run(&self) -> Output {
        Command::new(env!("CARGO_BIN_EXE_rtseval"))
            .args(&self.args)
            .output()
            .expect("binary runs")
    }
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Ground-truth and run files laid out as `gen-synth` does.
pub struct Collection {
    pub dir: PathBuf,
}

impl Collection {
    pub fn write(dir: &Path, f: &Fixture) -> Self {
        fs::create_dir_all(dir.join("runs")).unwrap();
        fs::write(dir.join("qrels.txt"), emit_qrels(&f.gt.qrels)).unwrap();
        fs::write(dir.join("clusters.txt"), emit_clusters(&f.gt.clusters)).unwrap();
        fs::write(dir.join("epoch.txt"), emit_epoch(&f.gt.epochs)).unwrap();
        fs::write(dir.join("stream.txt"), emit_epoch(&f.stream_epochs)).unwrap();
        for run in &f.runs {
            fs::write(dir.join("runs").join(format!("{}.txt", run.tag)), emit_run(run)).unwrap();
        }
        Collection { dir: dir.to_path_buf() }
    }

    pub fn existing(dir: &Path) -> Self {
        Collection { dir: dir.to_path_buf() }
    }

    pub fn replace_epochs(&self, epochs: &EpochMap) {
        fs::write(self.dir.join("epoch.txt"), emit_epoch(epochs)).unwrap();
    }

    pub fn path(&self, name: &str) -> String {
        self.dir.join(name).display().to_string()
    }

    /// `--qrels --clusters --epoch --run` pointing at this collection.
    pub fn inputs(&self) -> Vec<String> {
        vec![
            "--qrels".into(),
            self.path("qrels.txt"),
            "--clusters".into(),
            self.path("clusters.txt"),
            "--epoch".into(),
            self.path("epoch.txt"),
            "--run".into(),
            self.path("runs"),
        ]
    }
}

/// Flags describing `n` windows of `secs` seconds starting at `start`.
pub fn windows(start: i64, secs: i64, n: usize) -> Vec<String> {
    vec![
        "--start-epoch".into(),
        start.to_string(),
        "--window-seconds".into(),
        secs.to_string(),
        "--windows".into(),
        n.to_string(),
    ]
}

/// Value of `#aggregate <metric> <run>` in a TSV report.
pub fn aggregate(tsv: &str, metric: &str, run: &str) -> Option<f64> {
    tsv.lines().find_map(|l| {
        let f: Vec<&str> = l.split('\t').collect();
        (f.len() == 4 && f[0] == "#aggregate" && f[1] == metric && f[2] == run).then(|| f[3].parse().unwrap())
    })
}

/// Generates a synthetic collection into `dir` and returns it.
pub fn gen_synth(dir: &Path, seed: u64, profiles: usize, windows: usize, systems: usize) -> Collection {
    let out = synth_cmd(dir, seed, profiles, windows, systems).run();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    Collection::existing(dir)
}

pub fn synth_cmd(dir: &Path, seed: u64, profiles: usize, windows: usize, systems: usize) -> Cli {
    cli("gen-synth").args([
        "--seed".to_string(),
        seed.to_string(),
        "--profiles".into(),
        profiles.to_string(),
        "--windows".into(),
        windows.to_string(),
        "--systems".into(),
        systems.to_string(),
        "--out-dir".into(),
        dir.display().to_string(),
    ])
}

/// Window flags matching `gen-synth` defaults.
pub fn synth_windows(n: usize) -> Vec<String> {
    windows(1_501_286_400, 86_400, n)
}

/// Every file under `dir`, relative path and bytes, sorted.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
