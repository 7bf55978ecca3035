//! Offline fixture: synthetic clips, a copying frame decoder, scripted
//! speech engines and a mock model gateway.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use image::{Rgb, RgbImage};
use serde_json::json;
use tempfile::TempDir;
use tvlens_core::gateway::mock::{MockFixture, MockRule, MockUsage};

pub const TOKENS: i64 = 6224;
pub const TOPICS: [&str; 2] = ["Music", "Domestic politics"];

pub struct Fixture {
    pub dir: TempDir,
    pub clips: usize,
}

pub fn reply(topic: &str, flags: &[&str]) -> String {
    json!({
        "topic": topic,
        "environment": "Studio -- Guest panel",
        "named_entities": ["Mario Rossi"],
        "brand_safety_flag": flags,
    })
    .to_string()
}

fn usage() -> Option<MockUsage> {
    Some(MockUsage { prompt_tokens: TOKENS, completion_tokens: 90 })
}

impl Fixture {
    /// `clips` one-minute clips; clip 0 is the only sensitive one.
    pub fn new(clips: usize) -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        RgbImage::from_pixel(8, 8, Rgb([40, 90, 200])).save(root.join("frame.png")).unwrap();
        let mut lines = String::new();
        for i in 0..clips {
            std::fs::write(root.join(format!("clip{i}.mp4")), b"not really a video").unwrap();
            let row = json!({
                "clip_id": format!("c{i}"),
                "media_path": format!("clip{i}.mp4"),
                "duration_s": 60.0,
                "episode_meta": {
                    "programme_title": "Piazza Aperta",
                    "broadcast_date": "2025-03-14",
                    "genre": "Talk show",
                    "expected_guests": ["Mario Rossi"]
                },
                "gold": {
                    "topic": TOPICS[i % 2],
                    "environment": "Studio -- Guest panel",
                    "persons": ["Mario Rossi"],
                    "sensitive": if i == 0 { vec!["Violence"] } else { vec![] }
                }
            });
            lines.push_str(&row.to_string());
            lines.push('\n');
        }
        std::fs::write(root.join("clips.jsonl"), lines).unwrap();

        // Always "Music", never sensitive: topic accuracy is 0.5-ish and
        // sensitive precision is undefined.
        let fixture = MockFixture {
            rules: vec![MockRule { model: Some("video-refuser".into()), ..MockRule::status(400, "video input is not supported") }],
            default: Some(MockRule::reply(reply("Music", &[]), usage())),
        };
        std::fs::write(root.join("mock.json"), serde_json::to_string_pretty(&fixture).unwrap()).unwrap();
        Fixture { dir, clips }
    }

    pub fn root(&self) -> &Path {
        self.dir.path()
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root().join(rel)
    }

    pub fn out(&self, rel: &str) -> PathBuf {
        self.path("out").join(rel)
    }

    /// Manifest with the copying decoder (which logs each call to
    /// `decoder_calls.log`) and the given models and configs.
    pub fn manifest(&self, models: &[(&str, &[&str])], extra: &str) -> PathBuf {
        let mut body = String::from(
            r#"dataset = "clips.jsonl"
output_dir = "out"
parallelism = 4
seed = 7

[decoder]
program = "sh"
args = ["-c", 'cp "$0" "$1" && echo . >> "$2"', "frame.png", "{output}", "decoder_calls.log"]
"#,
        );
        body.push_str(extra);
        for (model, configs) in models {
            let list: Vec<String> = configs.iter().map(|c| format!("\"{c}\"")).collect();
            body.push_str(&format!(
                "\n[[models]]\nmodel_id = \"{model}\"\nendpoint_url = \"http://127.0.0.1:9/v1/chat/completions\"\nmax_retries = 0\ntimeout_s = 5.0\nconfigs = [{}]\n",
                list.join(", ")
            ));
        }
        let p = self.path("tvlens.toml");
        std::fs::write(&p, body).unwrap();
        p
    }

    /// Runs the binary from the fixture directory with `--mock`.
    pub fn run(&self, args: &[&str]) -> Output {
        let out = Command::new(env!("CARGO_BIN_EXE_tvlens"))
            .current_dir(self.root())
            .args(args)
            .args(["--mock", "mock.json", "--log-level", "warn"])
            .output()
            .unwrap();
        out
    }

    pub fn decoder_calls(&self) -> usize {
        std::fs::read_to_string(self.path("decoder_calls.log")).map(|s| s.lines().count()).unwrap_or(0)
    }
}

/// TOML for scripted subprocess speech engines: one segment per speaker.
pub fn speech_engines() -> String {
    let asr = r#"{"language":"it","segments":[{"start":0,"end":20,"text":"Buonasera a tutti"},{"start":20,"end":40,"text":"Grazie per l invito"},{"start":40,"end":60,"text":"Parliamo di musica"}]}"#;
    let diar = r#"{"turns":[{"start":0,"end":20,"speaker":"A"},{"start":20,"end":40,"speaker":"B"},{"start":40,"end":60,"speaker":"A"}]}"#;
    format!(
        r#"
[asr]
engine_id = "scripted-asr"
transport = "subprocess"
command = ["sh", "-c", 'cat >/dev/null; printf "%s" "$0"', '{asr}']

[diarization]
engine_id = "scripted-diar"
transport = "subprocess"
command = ["sh", "-c", 'cat >/dev/null; printf "%s" "$0"', '{diar}']
"#
    )
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display()))
}
