//! Report assembly shared by all subcommands: deterministic text output and a
//! versioned JSON wrapper carrying a timestamp and the configuration echo.

use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

#[derive(Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Clone, Debug)]
pub struct Record {
    pub name: String,
    pub status: Status,
}

#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub seed: u64,
    pub config: Value,
    pub records: Vec<Record>,
    /// Verbatim payload printed before the records in text mode, e.g. a
    /// rendered table.
    pub body: Option<String>,
}

impl Report {
    pub fn new(command: &'static str, seed: u64, config: Value) -> Self {
        Self {
            command,
            seed,
            config,
            records: Vec::new(),
            body: None,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.records.push(Record {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
        });
    }

    pub fn info(&mut self, name: impl Into<String>) {
        self.records.push(Record {
            name: name.into(),
            status: Status::Info,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }

    pub fn first_failure(&self) -> Option<&Record> {
        self.records.iter().find(|r| r.status == Status::Fail)
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.render_text(),
            ReportFormat::Json => self.render_json(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        if let Some(body) = &self.body {
            out.push_str(body);
        }
        for r in &self.records {
            match r.status {
                Status::Pass => out.push_str(&format!("{} : PASS\n", r.name)),
                Status::Fail => out.push_str(&format!("{} : FAIL\n", r.name)),
                Status::Info => out.push_str(&format!("{}\n", r.name)),
            }
        }
        if let Some(fail) = self.first_failure() {
            out.push_str(&format!("first failing identity: {}\n", fail.name));
        }
        out
    }

    fn render_json(&self) -> String {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let records: Vec<Value> = self
            .records
            .iter()
            .map(|r| {
                json!({
                    "name": r.name,
                    "status": match r.status {
                        Status::Pass => "pass",
                        Status::Fail => "fail",
                        Status::Info => "info",
                    },
                })
            })
            .collect();
        let mut doc = json!({
            "schema": 1,
            "command": self.command,
            "seed": self.seed,
            "timestamp_unix": timestamp,
            "config": self.config,
            "records": records,
            "all_pass": self.all_pass(),
        });
        if let Some(body) = &self.body {
            doc["body"] = Value::String(body.clone());
        }
        let mut text = serde_json::to_string_pretty(&doc).expect("json serialization");
        text.push('\n');
        text
    }
}
