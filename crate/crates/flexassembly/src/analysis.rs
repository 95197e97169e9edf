//! Frequency responses of one input/output pair for the nominal and the
//! perturbed solar-array frequency.

use std::f64::consts::PI;
use std::str::FromStr;

use flexassembly_core::linalg::Mat;
use flexassembly_core::linss::{freq_response, lft_upper, FrequencyGrid, StateSpace};
use flexassembly_core::{Error, Result};

/// Values of the normalized uncertainty drawn in every analysis.
pub const DELTAS: [f64; 3] = [-1.0, 0.0, 1.0];

/// `NAME` or `NAME{k}` with a 1-based component index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelSpec {
    pub input: Port,
    pub output: Port,
}

impl FromStr for Port {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        match s.split_once('{') {
            None if !s.is_empty() => Ok(Port {
                name: s.to_string(),
                index: None,
            }),
            None => Err("empty channel name".into()),
            Some((name, rest)) => {
                let k = rest
                    .strip_suffix('}')
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|k| *k >= 1)
                    .ok_or_else(|| format!("bad component in {s:?}, expected NAME{{k}} with k >= 1"))?;
                Ok(Port {
                    name: name.to_string(),
                    index: Some(k),
                })
            }
        }
    }
}

impl FromStr for ChannelSpec {
    type Err = String;

    /// `IN:OUT`, e.g. `T_ext{1}:omega_dot_G{1}`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (i, o) = s.split_once(':').ok_or_else(|| format!("{s:?} is not IN:OUT"))?;
        Ok(ChannelSpec {
            input: i.parse()?,
            output: o.parse()?,
        })
    }
}

impl std::fmt::Display for Port {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.index {
            Some(k) => write!(f, "{}{{{k}}}", self.name),
            None => f.write_str(&self.name),
        }
    }
}

fn pick(width: usize, k: usize, name: &str) -> Result<Mat> {
    if k > width {
        return Err(Error::Dimension(format!("{name} has {width} components, asked for {k}")));
    }
    let mut m = Mat::zeros(1, width);
    m[(0, k - 1)] = 1.0;
    Ok(m)
}

/// Sub-system for the requested pair, with `w_omega = delta z_omega` closed
/// first when the model carries the uncertainty channels.
pub fn channel_system(sys: &StateSpace, spec: &ChannelSpec, delta: f64) -> Result<StateSpace> {
    let closed = if sys.has_input("w_omega") && sys.has_output("z_omega") {
        lft_upper(sys, delta, "w_omega", "z_omega")?
    } else {
        sys.clone()
    };
    let sub = closed.select(&[&spec.input.name], &[&spec.output.name])?;
    let (a, mut b, mut c, mut d) = (sub.a().clone(), sub.b().clone(), sub.c().clone(), sub.d().clone());
    if let Some(k) = spec.output.index {
        let s = pick(c.nrows(), k, &spec.output.name)?;
        c = &s * &c;
        d = &s * &d;
    }
    if let Some(k) = spec.input.index {
        let s = pick(b.ncols(), k, &spec.input.name)?.transpose();
        b = &b * &s;
        d = &d * &s;
    }
    let ni = b.ncols();
    let no = c.nrows();
    StateSpace::new(
        a,
        b,
        c,
        d,
        flexassembly_core::linss::channels(&[(&spec.input.to_string(), ni)]),
        flexassembly_core::linss::channels(&[(&spec.output.to_string(), no)]),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub delta: f64,
    /// Largest singular value per grid point; NaN where the grid hits a pole.
    pub sigma: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub freq_hz: Vec<f64>,
    pub traces: Vec<Trace>,
}

impl Analysis {
    pub fn nominal(&self) -> &Trace {
        self.traces.iter().find(|t| t.delta == 0.0).expect("nominal trace")
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["freq_hz".to_string(), "sigma_max".to_string()];
        h.extend(self.traces.iter().map(|t| format!("sigma_delta_{}", t.delta)));
        h
    }

    pub fn rows(&self) -> Vec<Vec<String>> {
        let nominal = self.nominal();
        (0..self.freq_hz.len())
            .map(|i| {
                let mut r = vec![crate::report::num(self.freq_hz[i]), crate::report::num(nominal.sigma[i])];
                r.extend(self.traces.iter().map(|t| crate::report::num(t.sigma[i])));
                r
            })
            .collect()
    }
}

/// Log-spaced sweep between `fmin_hz` and `fmax_hz`.
pub fn analyze(sys: &StateSpace, spec: &ChannelSpec, fmin_hz: f64, fmax_hz: f64, points: usize) -> Result<Analysis> {
    let grid = FrequencyGrid::log_space(2.0 * PI * fmin_hz, 2.0 * PI * fmax_hz, points)?;
    let freq_hz: Vec<f64> = grid.points().iter().map(|w| w / (2.0 * PI)).collect();
    let mut traces = Vec::new();
    for &delta in &DELTAS {
        let sub = channel_system(sys, spec, delta)?;
        let fr = freq_response(&sub, &grid)?;
        let s = fr.sigma_max();
        let mut sigma = Vec::with_capacity(grid.points().len());
        let mut k = 0;
        for &w in grid.points() {
            if k < fr.omegas.len() && fr.omegas[k] == w {
                sigma.push(s[k]);
                k += 1;
            } else {
                sigma.push(f64::NAN);
            }
        }
        traces.push(Trace { delta, sigma });
    }
    Ok(Analysis { freq_hz, traces })
}

/// Interior local minima of a trace, as frequencies.
pub fn local_minima(freq: &[f64], sigma: &[f64]) -> Vec<f64> {
    (1..sigma.len().saturating_sub(1))
        .filter(|&i| sigma[i] < sigma[i - 1] && sigma[i] <= sigma[i + 1])
        .map(|i| freq[i])
        .collect()
}
