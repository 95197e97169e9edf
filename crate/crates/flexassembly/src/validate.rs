//! Data checks with a PASS / WARN / FAIL line per item.

use std::fmt;
use std::path::Path;

use flexassembly_core::modal::build_lattice;

use crate::config::{self, ConfigError, LoadedScenario, ModalBodyFile, RigidBodyFile, RobotFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Pass => "PASS",
            Level::Warn => "WARN",
            Level::Fail => "FAIL",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub level: Level,
    pub subject: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    fn push(&mut self, level: Level, subject: &str, message: impl Into<String>) {
        self.checks.push(Check {
            level,
            subject: subject.to_string(),
            message: message.into(),
        });
    }

    fn result<E: fmt::Display>(&mut self, subject: &str, r: Result<Vec<String>, E>) {
        match r {
            Ok(w) if w.is_empty() => self.push(Level::Pass, subject, "ok"),
            Ok(w) => {
                for m in w {
                    self.push(Level::Warn, subject, m);
                }
            }
            Err(e) => self.push(Level::Fail, subject, e.to_string()),
        }
    }

    pub fn worst(&self) -> Level {
        self.checks.iter().map(|c| c.level).max().unwrap_or(Level::Pass)
    }

    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| format!("{} {}: {}", c.level, c.subject, c.message))
            .collect()
    }
}

fn rigid(r: &mut Report, f: &RigidBodyFile) {
    let res = f.to_body().and_then(|b| b.validate().map_err(ConfigError::Invalid)).map(|_| Vec::new());
    r.result(&format!("body {}", f.name), res);
}

fn modal(r: &mut Report, f: &ModalBodyFile) {
    let res = f.to_body().and_then(|b| b.validate().map_err(ConfigError::from));
    r.result(&format!("body {}", f.name), res);
}

fn robot(r: &mut Report, f: &RobotFile) {
    rigid(r, &f.hub);
    let arm = f.arm().and_then(|a| a.validate().map_err(ConfigError::from).map(|_| Vec::new()));
    r.result("robot arms", arm);
    r.result("robot mounts", f.mounts().map(|_| Vec::new()));
}

/// Every body, the layout and the assembled configuration.
pub fn validate_scenario(s: &LoadedScenario) -> Report {
    let mut r = Report::default();
    rigid(&mut r, &s.hub);
    rigid(&mut r, &s.tile);
    modal(&mut r, &s.solar_array);
    robot(&mut r, &s.robot);
    for (n, j, f) in &s.structures {
        let res = f.to_body().and_then(|b| b.validate().map_err(ConfigError::from));
        r.result(&format!("structure n={n} j={j}"), res);
    }
    let layout = s.layout().and_then(|l| {
        l.check_order()?;
        let tile = s.tile.to_body()?;
        build_lattice(&l, &s.lattice(&tile)?)?;
        Ok(Vec::new())
    });
    r.result("layout", layout);
    r.result("scenario", s.config().and_then(|c| c.validate().map_err(ConfigError::from)));
    r
}

#[derive(serde::Deserialize)]
struct Kind {
    #[serde(default)]
    kind: Option<String>,
}

/// Validates one data file by its `kind` (`scenario`, `rigid_body`,
/// `modal_body` or `robot`). Read and parse errors are returned, data errors
/// land in the report.
pub fn validate_file(path: &Path) -> Result<Report, ConfigError> {
    let k: Kind = config::parse_file(path)?;
    let mut r = Report::default();
    match k.kind.as_deref() {
        Some("scenario") => return Ok(validate_scenario(&config::load_scenario(path)?)),
        Some("rigid_body") => rigid(&mut r, &config::parse_file(path)?),
        Some("modal_body") => modal(&mut r, &config::parse_file(path)?),
        Some("robot") => robot(&mut r, &config::parse_file(path)?),
        other => {
            return Err(ConfigError::Invalid(format!(
                "{}: unknown kind {other:?}",
                path.display()
            )))
        }
    }
    Ok(r)
}
