//! Key=value summaries and the benchmark report.

use std::fmt;

use esp_core::{ForceMethod, SelectedParameters, SplitFamily};

/// Ordered `key=value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn push_f64(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, format!("{value:e}"));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        Self { entries }
    }

    /// Every selected parameter, prefixed with `prefix`.
    pub fn push_plan(&mut self, prefix: &str, p: &SelectedParameters, method: ForceMethod) {
        let key = |k: &str| format!("{prefix}{k}");
        self.push(key("family"), family_name(p.family));
        self.push_f64(key("eps"), p.eps);
        self.push_f64(key("r_c"), p.r_c);
        self.push_f64(key("shape"), p.shape);
        self.push(key("n_f"), dims(p.n_f));
        self.push(key("base_n_f"), dims(p.base_n_f));
        self.push(key("total_modes"), p.n_f.iter().product::<usize>());
        self.push(key("order"), p.order);
        match p.c1 {
            Some(c1) => self.push_f64(key("c1"), c1),
            None => self.push(key("c1"), "none"),
        }
        self.push(key("force_method"), method_name(method));
        self.push_f64(key("aliasing_estimate"), p.aliasing);
        self.push_f64(key("truncation_estimate"), p.truncation);
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

pub fn family_name(f: SplitFamily) -> &'static str {
    match f {
        SplitFamily::Pswf => "pswf",
        SplitFamily::Gaussian => "gaussian",
    }
}

pub fn method_name(m: ForceMethod) -> &'static str {
    match m {
        ForceMethod::Ik => "ik",
        ForceMethod::Ad => "ad",
    }
}

fn dims(n: [usize; 3]) -> String {
    format!("{}x{}x{}", n[0], n[1], n[2])
}

/// Mean, minimum and maximum of one stage over repeated runs, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageStats {
    pub name: &'static str,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl StageStats {
    pub fn from_samples(name: &'static str, samples: &[f64]) -> Self {
        let n = samples.len().max(1) as f64;
        Self {
            name,
            mean: samples.iter().sum::<f64>() / n,
            min: samples.iter().cloned().fold(f64::INFINITY, f64::min),
            max: samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// One family's half of a benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyBench {
    pub params: SelectedParameters,
    pub force_method: ForceMethod,
    pub plan_seconds: f64,
    /// Per-stage statistics, plus a trailing `total` entry.
    pub stages: Vec<StageStats>,
    /// Relative RMS force error against the oracle, when it was run.
    pub delta: Option<f64>,
}

impl FamilyBench {
    pub fn total_modes(&self) -> usize {
        self.params.n_f.iter().product()
    }

    pub fn stage(&self, name: &str) -> Option<&StageStats> {
        self.stages.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub eps: f64,
    pub r_c: f64,
    pub box_lengths: [f64; 3],
    pub particles: usize,
    pub repetitions: usize,
    pub baseline: FamilyBench,
    pub candidate: FamilyBench,
}

impl BenchReport {
    /// `R = N_f(baseline) / N_f(candidate)`.
    pub fn ratio(&self) -> f64 {
        grid_ratio(&self.baseline.params, &self.candidate.params)
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        s.push_f64("eps", self.eps);
        s.push_f64("r_c", self.r_c);
        let l = self.box_lengths;
        s.push("box", format!("{:e} {:e} {:e}", l[0], l[1], l[2]));
        s.push("particles", self.particles);
        s.push("repetitions", self.repetitions);
        s.push_f64("ratio", self.ratio());
        for (prefix, fb) in [("baseline.", &self.baseline), ("candidate.", &self.candidate)] {
            s.push_plan(prefix, &fb.params, fb.force_method);
            s.push_f64(format!("{prefix}plan_seconds"), fb.plan_seconds);
            if let Some(d) = fb.delta {
                s.push_f64(format!("{prefix}delta"), d);
            }
            for st in &fb.stages {
                s.push_f64(format!("{prefix}{}.mean", st.name), st.mean);
                s.push_f64(format!("{prefix}{}.min", st.name), st.min);
                s.push_f64(format!("{prefix}{}.max", st.name), st.max);
            }
        }
        s
    }

    /// Human-readable table.
    pub fn table(&self) -> String {
        let mut out = format!(
            "eps={:e} r_c={} N={} reps={}\n",
            self.eps, self.r_c, self.particles, self.repetitions
        );
        out.push_str(&format!(
            "{:<10} {:>4} {:>12} {:>12} {:>8} {:>11} {:>11}\n",
            "family", "P", "raw n_f", "n_f", "N_f", "E_A", "delta"
        ));
        for fb in [&self.baseline, &self.candidate] {
            let p = &fb.params;
            out.push_str(&format!(
                "{:<10} {:>4} {:>12} {:>12} {:>8} {:>11.3e} {:>11}\n",
                family_name(p.family),
                p.order,
                dims(p.base_n_f),
                dims(p.n_f),
                fb.total_modes(),
                p.aliasing,
                fb.delta.map_or("-".to_string(), |d| format!("{d:.3e}")),
            ));
        }
        out.push_str(&format!("R = {:.3}\n", self.ratio()));
        out.push_str("stage        baseline mean/min [ms]    candidate mean/min [ms]\n");
        for (a, b) in self.baseline.stages.iter().zip(&self.candidate.stages) {
            out.push_str(&format!(
                "{:<12} {:>10.3} / {:<10.3}     {:>10.3} / {:<10.3}\n",
                a.name,
                1e3 * a.mean,
                1e3 * a.min,
                1e3 * b.mean,
                1e3 * b.min
            ));
        }
        out
    }
}

/// Ratio of total Fourier modes of two selections.
pub fn grid_ratio(a: &SelectedParameters, b: &SelectedParameters) -> f64 {
    let modes = |p: &SelectedParameters| p.n_f.iter().product::<usize>() as f64;
    modes(a) / modes(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_round_trips() {
        let mut s = Summary::default();
        s.push("a", 1);
        s.push_f64("b", 0.1);
        let back = Summary::parse(&s.to_string());
        assert_eq!(back, s);
        assert_eq!(back.get("b").unwrap().parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn stage_stats() {
        let s = StageStats::from_samples("fft", &[1.0, 3.0, 2.0]);
        assert_eq!((s.mean, s.min, s.max), (2.0, 1.0, 3.0));
    }
}
