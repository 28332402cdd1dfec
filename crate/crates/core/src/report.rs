//! Reports rendered as fixed-width text and as JSON with the same numbers.

use serde::{Deserialize, Serialize};

use crate::residual::{GatedResiduals, ResidualMap};

/// `{:e}` with a mantissa that always carries a decimal point: 0 → `0.0e0`.
pub fn fmt_num(v: f64) -> String {
    let s = format!("{v:e}");
    match s.split_once('e') {
        Some((m, e)) if !m.contains('.') && !m.contains("inf") && !m.contains("NaN") => format!("{m}.0e{e}"),
        _ => s,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped(String),
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub label: String,
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub status: Status,
    /// Render the value as an integer.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub count: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub lines: Vec<Line>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            lines: Vec::new(),
        }
    }

    /// Relative residuals judged against `tol`.
    pub fn residuals(mut self, map: &ResidualMap, tol: f64) -> Self {
        for (label, r) in map.iter() {
            let status = if r.passes(tol) { Status::Pass } else { Status::Fail };
            self.lines.push(Line {
                label: label.clone(),
                value: Some(r.relative()),
                text: None,
                status,
                count: false,
            });
        }
        self
    }

    /// Residuals that are only judged when their precondition holds.
    pub fn gated(self, gated: &GatedResiduals, tol: f64, reason: &str) -> Self {
        if gated.precondition_met {
            return self.residuals(&gated.residuals, tol);
        }
        let mut s = self;
        for (label, r) in gated.residuals.iter() {
            s.lines.push(Line {
                label: label.clone(),
                value: Some(r.relative()),
                text: None,
                status: Status::Skipped(reason.to_string()),
                count: false,
            });
        }
        s
    }

    pub fn skipped(mut self, label: impl Into<String>, reason: &str) -> Self {
        self.lines.push(Line {
            label: label.into(),
            value: None,
            text: None,
            status: Status::Skipped(reason.to_string()),
            count: false,
        });
        self
    }

    pub fn value(mut self, label: impl Into<String>, v: f64) -> Self {
        self.lines.push(Line {
            label: label.into(),
            value: Some(v),
            text: None,
            status: Status::Info,
            count: false,
        });
        self
    }

    pub fn text(mut self, label: impl Into<String>, t: impl Into<String>) -> Self {
        self.lines.push(Line {
            label: label.into(),
            value: None,
            text: Some(t.into()),
            status: Status::Info,
            count: false,
        });
        self
    }

    /// Informational line carrying both a number and a word.
    pub fn info(mut self, label: impl Into<String>, v: Option<f64>, t: impl Into<String>) -> Self {
        self.lines.push(Line {
            label: label.into(),
            value: v,
            text: Some(t.into()),
            status: Status::Info,
            count: false,
        });
        self
    }

    pub fn count(mut self, label: impl Into<String>, n: usize) -> Self {
        self.lines.push(Line {
            label: label.into(),
            value: Some(n as f64),
            text: None,
            status: Status::Info,
            count: true,
        });
        self
    }

    /// A count that must equal `expected`.
    pub fn count_check(mut self, label: impl Into<String>, n: usize, expected: usize) -> Self {
        self.lines.push(Line {
            label: label.into(),
            value: Some(n as f64),
            text: None,
            status: if n == expected { Status::Pass } else { Status::Fail },
            count: true,
        });
        self
    }

    pub fn check(mut self, label: impl Into<String>, v: Option<f64>, ok: bool) -> Self {
        self.lines.push(Line {
            label: label.into(),
            value: v,
            text: None,
            status: if ok { Status::Pass } else { Status::Fail },
            count: false,
        });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub title: String,
    pub tolerance: f64,
    pub sections: Vec<Section>,
}

const LABEL_WIDTH: usize = 72;

impl Report {
    pub fn new(title: impl Into<String>, tolerance: f64) -> Self {
        Self {
            title: title.into(),
            tolerance,
            sections: Vec::new(),
        }
    }

    pub fn push(&mut self, s: Section) {
        self.sections.push(s);
    }

    pub fn lines(&self) -> impl Iterator<Item = &Line> {
        self.sections.iter().flat_map(|s| s.lines.iter())
    }

    pub fn failures(&self) -> usize {
        self.lines().filter(|l| l.status == Status::Fail).count()
    }

    pub fn all_pass(&self) -> bool {
        self.failures() == 0
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.title);
        if self.tolerance > 0.0 {
            out.push_str(&format!("tolerance {}\n", fmt_num(self.tolerance)));
        }
        for s in &self.sections {
            out.push_str(&format!("\n[{}]\n", s.name));
            for l in &s.lines {
                let value = match (&l.value, &l.text) {
                    (Some(v), Some(t)) => format!("{} {t}", fmt_num(*v)),
                    (None, Some(t)) => t.clone(),
                    (Some(v), None) if l.count => format!("{v}"),
                    (Some(v), None) => fmt_num(*v),
                    (None, None) => String::new(),
                };
                let status = match &l.status {
                    Status::Pass => "PASS".to_string(),
                    Status::Fail => "FAIL".to_string(),
                    Status::Skipped(why) => format!("skipped: {why}"),
                    Status::Info => String::new(),
                };
                let line = format!("  {:<w$} {value} {status}", l.label, w = LABEL_WIDTH);
                out.push_str(line.trim_end());
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
