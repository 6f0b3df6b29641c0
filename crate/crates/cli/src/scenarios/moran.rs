use dimlab_core::config::Number;
use dimlab_core::percolation::moran_from_ratios;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ensure, Outcome, Scenario};
use crate::config::{ThresholdSpec, Thresholds};
use crate::error::Result;
use crate::report::{Bound, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub ratios: Vec<Number>,
    pub expected: Number,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub cases: Vec<Case>,
}

impl Default for Params {
    fn default() -> Self {
        let n = |s: &str| Number::Text(s.into());
        Self {
            cases: vec![
                Case {
                    ratios: vec![n("1/2"), n("1/4"), n("1/4")],
                    expected: Number::Float(1.0),
                },
                Case {
                    ratios: vec![n("1/2"), n("1/2"), n("1/2")],
                    expected: Number::Float(3f64.ln() / 2f64.ln()),
                },
            ],
        }
    }
}

/// Similarity dimensions against stated values.
pub struct Moran;

impl Scenario for Moran {
    const NAME: &'static str = "moran";
    const THRESHOLDS: &'static [ThresholdSpec] = &[ThresholdSpec {
        name: "max_error",
        default: 1e-10,
        bound: Bound::AtMost,
    }];
    type Params = Params;

    fn validate(p: &Params) -> Result<()> {
        ensure(
            !p.cases.is_empty(),
            "parameters.cases",
            "at least one case is needed",
        )?;
        for (i, c) in p.cases.iter().enumerate() {
            let path = format!("parameters.cases[{i}]");
            ensure(!c.ratios.is_empty(), &format!("{path}.ratios"), "empty")?;
            for (j, r) in c.ratios.iter().enumerate() {
                let at = format!("{path}.ratios[{j}]");
                let v = r.value().map_err(|e| crate::CliError::invalid(&at, e))?;
                ensure(v > 0.0 && v < 1.0, &at, format!("{v} not in (0, 1)"))?;
            }
            let at = format!("{path}.expected");
            let v = c
                .expected
                .value()
                .map_err(|e| crate::CliError::invalid(&at, e))?;
            ensure(v.is_finite(), &at, "must be finite")?;
        }
        Ok(())
    }

    fn run(p: &Params, _seed: u64, t: &Thresholds) -> Result<Outcome> {
        let mut table = Table::new(&["case", "ratios", "dimension", "expected", "error"]);
        let mut worst = 0.0f64;
        for (i, c) in p.cases.iter().enumerate() {
            let ratios: Vec<f64> = c
                .ratios
                .iter()
                .map(|r| r.value())
                .collect::<std::result::Result<_, _>>()?;
            let rmax = ratios.iter().copied().fold(0.0, f64::max);
            // Σ r_i^s ≤ m rmax^s, so the root lies below ln m / ln(1/rmax).
            let upper = (ratios.len() as f64).ln() / -rmax.ln() + 1.0;
            let s = moran_from_ratios(&ratios, upper)?;
            let expected = c.expected.value()?;
            let err = (s - expected).abs();
            worst = worst.max(err);
            let text: Vec<String> = ratios.iter().map(f64::to_string).collect();
            table.push(vec![
                json!(i),
                json!(text.join(" ")),
                json!(s),
                json!(expected),
                json!(err),
            ]);
        }
        Ok(Outcome {
            checks: vec![t.check("max_error", worst)],
            table,
        })
    }
}
