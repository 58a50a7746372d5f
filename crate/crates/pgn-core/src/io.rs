//! File formats: canonical template JSON (`pgn-template-v1`), lattice JSON,
//! round-trip-exact trace CSV, and JSON projections of the score report.
//! All outputs are deterministic: fixed field order, canonical rational
//! strings, and 17-significant-digit floats that parse back bit-exactly.

use serde::{Deserialize, Serialize};

use crate::dims::Dims;
use crate::error::{Error, Result};
use crate::path::PiecewisePath;
use crate::rational::{fmt_rat, parse_rat, Rat};
use crate::score::ScoreReport;
use crate::template::{LinkedTemplate, Template};
use crate::trace::MinimaTrace;

pub const TEMPLATE_FORMAT: &str = "pgn-template-v1";

/// Serde adapter: one rational as its canonical string.
pub mod rat_string {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: a pair of rationals as canonical strings.
pub mod rat_pair_string {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        pair: &(Rat, Rat),
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeTuple;
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&fmt_rat(&pair.0))?;
        t.serialize_element(&fmt_rat(&pair.1))?;
        t.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<(Rat, Rat), D::Error> {
        let (a, b) = <(String, String)>::deserialize(d)?;
        Ok((
            parse_rat(&a).map_err(serde::de::Error::custom)?,
            parse_rat(&b).map_err(serde::de::Error::custom)?,
        ))
    }
}

/// Builder parameters recorded alongside emitted templates.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Provenance {
    pub m: u32,
    pub n: u32,
    pub k: u32,
    pub horizon: String,
}

/// Canonical template JSON document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateJson {
    pub format: String,
    pub m: u32,
    pub n: u32,
    pub breakpoints: Vec<String>,
    pub values: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchors: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

pub fn path_to_json(
    path: &PiecewisePath,
    anchors: Option<&[Rat]>,
    provenance: Option<Provenance>,
) -> TemplateJson {
    TemplateJson {
        format: TEMPLATE_FORMAT.to_string(),
        m: path.dims().m(),
        n: path.dims().n(),
        breakpoints: path.breakpoints().iter().map(fmt_rat).collect(),
        values: path
            .values()
            .iter()
            .map(|row| row.iter().map(fmt_rat).collect())
            .collect(),
        anchors: anchors.map(|a| a.iter().map(fmt_rat).collect()),
        provenance,
    }
}

pub fn linked_to_json(lt: &LinkedTemplate, provenance: Option<Provenance>) -> TemplateJson {
    path_to_json(lt.path(), Some(lt.anchors()), provenance)
}

/// Parses a template document back into a path plus optional anchors.
pub fn json_to_path(doc: &TemplateJson) -> Result<(PiecewisePath, Option<Vec<Rat>>)> {
    if doc.format != TEMPLATE_FORMAT {
        return Err(Error::Parse(format!(
            "unsupported template format {:?} (expected {TEMPLATE_FORMAT:?})",
            doc.format
        )));
    }
    let dims = Dims::new(doc.m, doc.n)?;
    let breakpoints = doc
        .breakpoints
        .iter()
        .map(|s| parse_rat(s))
        .collect::<Result<Vec<_>>>()?;
    let values = doc
        .values
        .iter()
        .map(|row| row.iter().map(|s| parse_rat(s)).collect())
        .collect::<Result<Vec<_>>>()?;
    let path = PiecewisePath::new(dims, breakpoints, values)?;
    let anchors = doc
        .anchors
        .as_ref()
        .map(|a| a.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>())
        .transpose()?;
    Ok((path, anchors))
}

/// Parses and certifies; with anchors present the result is re-checked as a
/// linked template.
pub fn json_to_template(doc: &TemplateJson) -> Result<(Template, Option<Vec<Rat>>)> {
    let (path, anchors) = json_to_path(doc)?;
    let template = Template::certify(path);
    if let Some(a) = &anchors {
        // Anchor invariants hold even for templates that fail the axioms;
        // reuse the linked constructor for the checks, then discard it.
        LinkedTemplate::new(Template::certify(template.path().clone()), a.clone())?;
    }
    Ok((template, anchors))
}

/// Lattice JSON: flow dimensions plus a row-major basis whose columns
/// generate the lattice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeJson {
    pub m: u32,
    pub n: u32,
    pub basis: Vec<f64>,
}

/// Shortest-decimal-beating float formatting: 17 significant digits always
/// parse back to the identical bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the trace CSV: `t,lambda_1..lambda_d,log_lambda_1..log_lambda_d`.
pub fn write_trace_csv(trace: &MinimaTrace, out: &mut impl std::io::Write) -> Result<()> {
    let d = trace.d;
    let mut header = String::from("t");
    for i in 1..=d {
        header.push_str(&format!(",lambda_{i}"));
    }
    for i in 1..=d {
        header.push_str(&format!(",log_lambda_{i}"));
    }
    writeln!(out, "{header}")?;
    for (i, t) in trace.times.iter().enumerate() {
        let mut row = fmt_f64(*t);
        for v in &trace.minima[i] {
            row.push(',');
            row.push_str(&fmt_f64(*v));
        }
        for v in &trace.log_minima[i] {
            row.push(',');
            row.push_str(&fmt_f64(*v));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

pub fn read_trace_csv(text: &str) -> Result<MinimaTrace> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty trace CSV".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.is_empty() || cols[0] != "t" || (cols.len() - 1) % 2 != 0 {
        return Err(Error::Parse(format!("bad trace header {header:?}")));
    }
    let d = (cols.len() - 1) / 2;
    if d == 0 || cols[1] != "lambda_1" {
        return Err(Error::Parse(format!("bad trace header {header:?}")));
    }
    let mut times = Vec::new();
    let mut minima = Vec::new();
    let mut log_minima = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad float {f:?} on data row {ln}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if fields.len() != 1 + 2 * d {
            return Err(Error::Parse(format!(
                "row {ln} has {} fields, expected {}",
                fields.len(),
                1 + 2 * d
            )));
        }
        times.push(fields[0]);
        minima.push(fields[1..1 + d].to_vec());
        log_minima.push(fields[1 + d..].to_vec());
    }
    if times.is_empty() {
        return Err(Error::Parse("trace CSV has no data rows".into()));
    }
    Ok(MinimaTrace {
        d,
        times,
        minima,
        log_minima,
    })
}

/// Breakpoint CSV for plotting: `t,f_1..f_d`, floats of the exact values.
pub fn write_breakpoints_csv(path: &PiecewisePath, out: &mut impl std::io::Write) -> Result<()> {
    let d = path.dims().d_usize();
    let mut header = String::from("t");
    for i in 1..=d {
        header.push_str(&format!(",f_{i}"));
    }
    writeln!(out, "{header}")?;
    for (t, row) in path.breakpoints().iter().zip(path.values()) {
        let mut line = fmt_f64(crate::rational::rat_to_f64(t));
        for v in row {
            line.push(',');
            line.push_str(&fmt_f64(crate::rational::rat_to_f64(v)));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// JSON projection of a score segment, per the CLI contract.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreSegmentJson {
    pub t_start: String,
    pub t_end: String,
    pub delta: u64,
    pub s_plus: Vec<u32>,
    pub m_plus: Vec<u32>,
    pub m_minus: Vec<u32>,
    pub running_average: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreReportJson {
    pub m: u32,
    pub n: u32,
    pub horizon: String,
    pub segments: Vec<ScoreSegmentJson>,
    pub average: String,
    pub liminf_estimate: String,
    pub target: String,
    pub abs_error: String,
}

pub fn score_report_to_json(report: &ScoreReport) -> ScoreReportJson {
    ScoreReportJson {
        m: report.dims.m(),
        n: report.dims.n(),
        horizon: fmt_rat(&report.horizon),
        segments: report
            .segments
            .iter()
            .map(|s| ScoreSegmentJson {
                t_start: fmt_rat(&s.start),
                t_end: fmt_rat(&s.end),
                delta: s.delta,
                s_plus: s.s_plus.clone(),
                m_plus: s.intervals.iter().map(|iv| iv.m_plus).collect(),
                m_minus: s.intervals.iter().map(|iv| iv.m_minus).collect(),
                running_average: fmt_rat(&s.running_average),
            })
            .collect(),
        average: fmt_rat(&report.average),
        liminf_estimate: fmt_rat(&report.liminf_estimate),
        target: fmt_rat(&report.target),
        abs_error: fmt_rat(&report.abs_error),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::build_f1;
    use crate::rational::rat;

    #[test]
    fn template_json_round_trip_is_exact() {
        let dims = Dims::new(2, 1).unwrap();
        let lt = build_f1(dims, &rat(9)).unwrap();
        let doc = linked_to_json(
            &lt,
            Some(Provenance {
                m: 2,
                n: 1,
                k: 0,
                horizon: "9".into(),
            }),
        );
        let text = serde_json::to_string_pretty(&doc).unwrap();
        let parsed: TemplateJson = serde_json::from_str(&text).unwrap();
        let (path, anchors) = json_to_path(&parsed).unwrap();
        assert_eq!(&path, lt.path());
        assert_eq!(anchors.as_deref(), Some(lt.anchors()));
        assert_eq!(parsed.provenance, doc.provenance);
    }

    #[test]
    fn rejects_unknown_format() {
        let doc = TemplateJson {
            format: "something-else".into(),
            m: 1,
            n: 1,
            breakpoints: vec!["0".into()],
            values: vec![vec!["0".into(), "0".into()]],
            anchors: None,
            provenance: None,
        };
        assert!(json_to_path(&doc).is_err());
    }

    #[test]
    fn trace_csv_round_trip_is_bit_exact() {
        let trace = MinimaTrace {
            d: 2,
            times: vec![0.0, 0.1, 0.2],
            minima: vec![vec![1.0, 1.0], vec![0.9048374180359595, 2.0], vec![0.1, 3.0]],
            log_minima: vec![
                vec![0.0, 0.0],
                vec![-0.1, std::f64::consts::LN_2],
                vec![-2.302585092994046, 1.0986122886681098],
            ],
        };
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf).unwrap();
        let parsed = read_trace_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(parsed.d, trace.d);
        assert_eq!(parsed.times, trace.times);
        assert_eq!(parsed.minima, trace.minima);
        assert_eq!(parsed.log_minima, trace.log_minima);
    }
}
