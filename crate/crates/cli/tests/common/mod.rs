#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

use tourlens::io::{read_csv_path, CsvOptions, LabelColumn};
use tourlens::session::ServerMessage;
use tourlens::DataMatrix;
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

pub fn tourlens() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tourlens"))
}

pub fn run(args: &[&str], dir: &Path) -> Output {
    tourlens()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

pub fn ok(args: &[&str], dir: &Path) -> Output {
    let out = run(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn read_table(path: &Path) -> DataMatrix {
    read_labeled(path, "label")
}

/// Reads a table whose string column, when present, is `label_column`.
pub fn read_labeled(path: &Path, label_column: &str) -> DataMatrix {
    let opts = CsvOptions {
        has_header: true,
        label_column: Some(LabelColumn::IfPresent(label_column.into())),
    };
    read_csv_path(path, &opts).expect("readable csv")
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("file exists")).expect("json")
}

/// A running `serve` process and the address it printed.
pub struct Server {
    pub child: Child,
    pub url: String,
}

impl Server {
    pub fn spawn(args: &[&str], dir: &Path) -> Server {
        let mut child = tourlens()
            .arg("serve")
            .args(args)
            .current_dir(dir)
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .expect("serve starts");
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let url = line
            .split_whitespace()
            .find(|w| w.starts_with("ws://"))
            .unwrap_or_else(|| panic!("no url in {line:?}"))
            .to_string();
        Server { child, url }
    }

    pub fn connect(&self) -> Client {
        let (ws, _) = tungstenite::connect(self.url.as_str()).expect("handshake");
        if let MaybeTlsStream::Plain(s) = ws.get_ref() {
            s.set_read_timeout(Some(Duration::from_secs(30))).unwrap();
        }
        Client { ws }
    }

    /// Waits for the process to exit on its own.
    pub fn wait(mut self, limit: Duration) -> std::process::ExitStatus {
        let start = Instant::now();
        loop {
            if let Some(status) = self.child.try_wait().unwrap() {
                return status;
            }
            if start.elapsed() > limit {
                let _ = self.child.kill();
                panic!("server did not exit within {limit:?}");
            }
            std::thread::sleep(Duration::from_millis(20));
        }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub struct Client {
    pub ws: WebSocket<MaybeTlsStream<TcpStream>>,
}

impl Client {
    pub fn send(&mut self, json: &str) {
        self.ws.send(Message::text(json)).unwrap();
    }

    pub fn recv(&mut self) -> ServerMessage {
        loop {
            match self.ws.read().expect("message") {
                Message::Text(t) => return ServerMessage::parse(&t).expect("valid message"),
                Message::Close(_) => panic!("socket closed"),
                _ => {}
            }
        }
    }

    /// Reads until a message satisfies `pred`.
    pub fn recv_until(&mut self, mut pred: impl FnMut(&ServerMessage) -> bool) -> ServerMessage {
        loop {
            let m = self.recv();
            if pred(&m) {
                return m;
            }
        }
    }
}
