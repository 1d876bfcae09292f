use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::thread::sleep;
use std::time::{Duration, Instant};

const CORPUS: &str = "\
ceese' he'ihneestoyoohobee hinii3ebio
ceese' hookuhu'eeno he'ihce'ciiciinen
noh wohei he'ihbii koox
nih'ii3 hee3oohok beebeet nuhu'
hiit neneeni3i toyoohobee koox
tih'ii hoo3oo' he'ihnoo bee3
nii'ehi cee'iini wohei noh
";

fn titl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_titl"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.env("RUST_LOG", "warn").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("corpus.txt"), CORPUS).unwrap();
        Workspace { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn train(&self, out: &str) -> Output {
        run(titl()
            .args(["train", "--dim", "8", "--buckets", "5000", "--epochs", "3", "--seed", "7"])
            .arg("--corpus")
            .arg(self.path("corpus.txt"))
            .arg("--out")
            .arg(self.path(out)))
    }

    fn trained_and_indexed(&self) {
        assert!(self.train("model.bin").status.success());
        let out = run(titl()
            .arg("index")
            .arg("--corpus")
            .arg(self.path("corpus.txt"))
            .arg("--model")
            .arg(self.path("model.bin"))
            .arg("--out")
            .arg(self.path("index.bin")));
        assert!(out.status.success(), "{}", stderr(&out));
        assert_eq!(stdout(&out), "sentences\t7\n");
    }
}

#[test]
fn train_is_byte_deterministic() {
    let ws = Workspace::new();
    let a = ws.train("a.bin");
    let b = ws.train("b.bin");
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    let report = stdout(&a);
    assert!(report.contains("token_count\t26\n"), "{report}");
    assert!(report.starts_with("vocab_size\t"));
    assert_eq!(
        std::fs::read(ws.path("a.bin")).unwrap(),
        std::fs::read(ws.path("b.bin")).unwrap()
    );
}

#[test]
fn missing_corpus_fails_with_message() {
    let ws = Workspace::new();
    let out = run(titl()
        .args(["train", "--corpus"])
        .arg(ws.path("nope.txt"))
        .arg("--out")
        .arg(ws.path("m.bin")));
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nope.txt"), "{}", stderr(&out));
    assert!(!ws.path("m.bin").exists());
}

#[test]
fn usage_errors_exit_two() {
    let out = run(titl().args(["train", "--dim"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_named() {
    let ws = Workspace::new();
    std::fs::write(ws.path("titl.toml"), "bind = \"127.0.0.1:8123\"\nsesion_ttl = 5\n").unwrap();
    let out = run(titl().arg("serve").arg("--config").arg(ws.path("titl.toml")));
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("sesion_ttl"), "{}", stderr(&out));
}

#[test]
fn scripted_query_session() {
    let ws = Workspace::new();
    ws.trained_and_indexed();
    let export = ws.path("picked.txt");
    let script = format!(
        "ceese' he'ihneestoyoohobee hinii3ebio\nr\ni\nx\nmore\nr\ns\nexport {}\nquit\n",
        export.display()
    );
    let mut child = titl()
        .args(["query", "--k", "2"])
        .arg("--index")
        .arg(ws.path("index.bin"))
        .arg("--model")
        .arg(ws.path("model.bin"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(script.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let transcript = stdout(&out);
    assert!(transcript.contains("  1. [0] 1.0000  ceese' he'ihneestoyoohobee hinii3ebio"), "{transcript}");
    assert!(transcript.contains("wrote 2 sentences to"), "{transcript}");
    let written = std::fs::read_to_string(&export).unwrap();
    assert_eq!(written.lines().count(), 2);
    assert_eq!(written.lines().next().unwrap(), "ceese' he'ihneestoyoohobee hinii3ebio");
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn http_get(port: u16, path: &str) -> Option<String> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(stream, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").ok()?;
    let mut response = String::new();
    stream.read_to_string(&mut response).ok()?;
    Some(response)
}

fn wait_for_health(port: u16) -> String {
    let deadline = Instant::now() + Duration::from_secs(20);
    while Instant::now() < deadline {
        if let Some(r) = http_get(port, "/api/health") {
            return r;
        }
        sleep(Duration::from_millis(50));
    }
    panic!("service did not come up on port {port}");
}

#[cfg(unix)]
#[test]
fn serve_answers_health_and_snapshots_on_sigint() {
    let ws = Workspace::new();
    ws.trained_and_indexed();
    let port = free_port();
    let snapshot = ws.path("sessions.json");
    let config = format!(
        "bind = \"127.0.0.1:{port}\"\nindex_path = {:?}\nmodel_path = {:?}\nsnapshot_path = {:?}\n",
        ws.path("index.bin"),
        ws.path("model.bin"),
        snapshot
    );
    std::fs::write(ws.path("titl.toml"), config).unwrap();
    let child = titl()
        .arg("serve")
        .arg("--config")
        .arg(ws.path("titl.toml"))
        .env("RUST_LOG", "warn")
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let response = wait_for_health(port);
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("\"corpus_sentences\":7"), "{response}");

    let status = Command::new("kill").arg("-INT").arg(child.id().to_string()).status().unwrap();
    assert!(status.success());
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_snapshot(&snapshot);
}

fn assert_snapshot(path: &Path) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.contains("\"sentence_count\": 7"), "{text}");
}
