//! A fixed script of CLI invocations whose outputs are pinned as golden files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

/// One invocation: a name, its arguments, and the file (relative to the
/// working directory) that its stdout is saved to for later steps.
pub struct Step {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub saves: Option<&'static str>,
    /// Extra files the command writes, also pinned.
    pub extra: &'static [&'static str],
}

pub const SCRIPT: &[Step] = &[
    Step {
        name: "gen_projective",
        args: &["gen", "projective", "--q", "2"],
        saves: Some("pg.txt"),
        extra: &[],
    },
    Step {
        name: "gen_complete_bipartite",
        args: &["gen", "complete-bipartite", "--a", "2", "--b", "3"],
        saves: None,
        extra: &[],
    },
    Step {
        name: "gen_gnm",
        args: &["gen", "gnm", "--n", "24", "--m", "90", "--seed", "5"],
        saves: Some("g.txt"),
        extra: &[],
    },
    Step {
        name: "gen_biregular",
        args: &["gen", "biregular", "--q", "3", "--g", "2"],
        saves: None,
        extra: &[],
    },
    Step {
        name: "gen_hard_mult3",
        args: &["gen", "hard-mult3", "--q", "2", "--s", "4", "--partition-out", "hp.txt"],
        saves: Some("hg.txt"),
        extra: &["hp.txt"],
    },
    Step {
        name: "gen_partition",
        args: &[
            "gen",
            "partition",
            "--graph",
            "g.txt",
            "--s",
            "3",
            "--mode",
            "duplicated-random",
            "--seed",
            "1",
        ],
        saves: Some("p.txt"),
        extra: &[],
    },
    Step {
        name: "gen_stream",
        args: &["gen", "stream", "--graph", "g.txt", "--churn", "0.2", "--seed", "2"],
        saves: Some("s.txt"),
        extra: &[],
    },
    Step {
        name: "run_additive2",
        args: &[
            "run",
            "additive2",
            "--graph",
            "g.txt",
            "--partition",
            "p.txt",
            "--seed",
            "1",
            "--verify",
            "--spanner-out",
            "h.txt",
        ],
        saves: None,
        extra: &["h.txt"],
    },
    Step {
        name: "run_additive_k",
        args: &[
            "run",
            "additive-k",
            "--beta",
            "8",
            "--graph",
            "g.txt",
            "--partition",
            "p.txt",
            "--seed",
            "1",
            "--verify",
        ],
        saves: None,
        extra: &[],
    },
    Step {
        name: "run_greedy",
        args: &[
            "run",
            "greedy",
            "--k",
            "2",
            "--graph",
            "g.txt",
            "--partition",
            "p.txt",
            "--verify",
        ],
        saves: None,
        extra: &[],
    },
    Step {
        name: "run_baswana_sen",
        args: &[
            "run",
            "baswana-sen",
            "--k",
            "3",
            "--graph",
            "g.txt",
            "--partition",
            "p.txt",
            "--seed",
            "3",
            "--verify",
        ],
        saves: None,
        extra: &[],
    },
    Step {
        name: "run_simultaneous",
        args: &[
            "run",
            "simultaneous",
            "--k",
            "2",
            "--graph",
            "g.txt",
            "--partition",
            "p.txt",
            "--verify",
            "--free-randomness",
        ],
        saves: None,
        extra: &[],
    },
    Step {
        name: "verify",
        args: &["verify", "--graph", "g.txt", "--spanner", "h.txt", "--additive", "2"],
        saves: None,
        extra: &[],
    },
    Step {
        name: "stream_run",
        args: &[
            "stream-run",
            "--stream",
            "s.txt",
            "--k",
            "3",
            "--seed",
            "4",
            "--passes-check",
            "--verify",
        ],
        saves: None,
        extra: &[],
    },
    Step {
        name: "sweep",
        args: &[
            "sweep",
            "--protocol",
            "greedy",
            "--n",
            "16,24,32",
            "--s",
            "2",
            "--k",
            "2",
            "--seeds",
            "2",
            "--family",
            "gnm:0.25:2",
            "--jobs",
            "2",
        ],
        saves: Some("sw.csv"),
        extra: &[],
    },
    Step {
        name: "fit",
        args: &["fit", "--input", "sw.csv", "--variable", "n"],
        saves: None,
        extra: &[],
    },
    Step {
        name: "girth",
        args: &["girth", "--graph", "pg.txt"],
        saves: None,
        extra: &[],
    },
];

pub fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_commspan"))
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Runs the script in `dir`; returns `(artifact name, bytes)` in order.
/// Any nonzero exit is an error.
pub fn run_script(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut artifacts = Vec::new();
    for step in SCRIPT {
        let out = Command::new(binary())
            .args(step.args)
            .current_dir(dir)
            .output()
            .map_err(|e| format!("{}: cannot spawn: {e}", step.name))?;
        if !out.status.success() {
            return Err(format!(
                "{} exited with {:?}: {}",
                step.name,
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        if let Some(file) = step.saves {
            fs::write(dir.join(file), &out.stdout).map_err(|e| e.to_string())?;
        }
        artifacts.push((format!("{}.out", step.name), out.stdout));
        for file in step.extra {
            let bytes = fs::read(dir.join(file)).map_err(|e| format!("{}: {file}: {e}", step.name))?;
            artifacts.push((format!("{}.{file}", step.name), bytes));
        }
    }
    Ok(artifacts)
}

/// Compares artifacts with the golden directory, or rewrites it when
/// `UPDATE_GOLDEN` is set. Returns the names that differ.
pub fn check_golden(artifacts: &[(String, Vec<u8>)]) -> Vec<String> {
    let dir = golden_dir();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(&dir).expect("create golden dir");
        for (name, bytes) in artifacts {
            fs::write(dir.join(name), bytes).expect("write golden file");
        }
        return Vec::new();
    }
    artifacts
        .iter()
        .filter(|(name, bytes)| fs::read(dir.join(name)).ok().as_ref() != Some(bytes))
        .map(|(name, _)| name.clone())
        .collect()
}
