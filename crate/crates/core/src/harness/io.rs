//! Text formats: problem files, trace CSV and the key-value run summary.
//!
//! Problem file layout, whitespace separated:
//!
//! ```text
//! n m I J loss_kind reg_kind gamma
//! <J block sizes>
//! <m targets>
//! <m rows of n design entries>
//! ```
//!
//! `reg_kind` is one penalty token applied to every block, or `J` tokens
//! joined by commas. Tokens: `zero`, `l1:w`, `group_l2:w`,
//! `sparse_group:group:l1`, `ridge:w`, `elastic_net:l1:ridge`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use ndarray::{Array1, Array2};

use crate::blocks::BlockPartition;
use crate::error::{Error, Result};
use crate::harness::trace::{Trace, TraceRecord};
use crate::oracles::{contiguous_batches, LossKind, ProblemInstance};
use crate::prox::{Penalty, RegularizerSpec};

pub fn format_penalty(p: &Penalty) -> String {
    match *p {
        Penalty::Zero => "zero".into(),
        Penalty::L1(w) => format!("l1:{w}"),
        Penalty::GroupL2(w) => format!("group_l2:{w}"),
        Penalty::SparseGroup { group, l1 } => format!("sparse_group:{group}:{l1}"),
        Penalty::Ridge(w) => format!("ridge:{w}"),
        Penalty::ElasticNet { l1, ridge } => format!("elastic_net:{l1}:{ridge}"),
    }
}

pub fn parse_penalty(token: &str) -> Result<Penalty> {
    let mut parts = token.split(':');
    let name = parts.next().unwrap_or_default();
    let weights = parts
        .map(|w| {
            w.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad penalty weight `{w}` in `{token}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let penalty = match (name, weights.as_slice()) {
        ("zero", []) => Penalty::Zero,
        ("l1", [w]) => Penalty::L1(*w),
        ("group_l2", [w]) => Penalty::GroupL2(*w),
        ("sparse_group", [group, l1]) => Penalty::SparseGroup { group: *group, l1: *l1 },
        ("ridge", [w]) => Penalty::Ridge(*w),
        ("elastic_net", [l1, ridge]) => Penalty::ElasticNet { l1: *l1, ridge: *ridge },
        _ => return Err(Error::Config(format!("unrecognized penalty `{token}`"))),
    };
    Ok(penalty)
}

fn format_regularizer(reg: &RegularizerSpec) -> String {
    let tokens: Vec<String> = reg.penalties().iter().map(format_penalty).collect();
    if tokens.iter().all(|t| *t == tokens[0]) {
        tokens[0].clone()
    } else {
        tokens.join(",")
    }
}

fn parse_regularizer(field: &str, num_blocks: usize) -> Result<RegularizerSpec> {
    let tokens: Vec<&str> = field.split(',').collect();
    let penalties = match tokens.len() {
        1 => vec![parse_penalty(tokens[0])?; num_blocks],
        k if k == num_blocks => tokens.iter().map(|t| parse_penalty(t)).collect::<Result<_>>()?,
        k => {
            return Err(Error::Config(format!(
                "regularizer lists {k} penalties for {num_blocks} blocks"
            )))
        }
    };
    RegularizerSpec::new(penalties)
}

pub fn write_problem(prob: &ProblemInstance, out: &mut impl Write) -> Result<()> {
    writeln!(
        out,
        "{} {} {} {} {} {} {}",
        prob.dim(),
        prob.num_samples(),
        prob.num_batches(),
        prob.num_blocks(),
        prob.loss().name(),
        format_regularizer(prob.reg()),
        prob.gamma()
    )?;
    let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");
    writeln!(out, "{}", join(&mut prob.partition().sizes().iter().map(|s| s.to_string())))?;
    writeln!(out, "{}", join(&mut prob.targets().iter().map(|v| v.to_string())))?;
    for row in prob.design().rows() {
        writeln!(out, "{}", join(&mut row.iter().map(|v| v.to_string())))?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_fields(&mut self, what: &str) -> Result<(usize, Vec<String>)> {
        loop {
            self.line += 1;
            match self.inner.next() {
                None => {
                    return Err(Error::Parse {
                        line: self.line,
                        message: format!("unexpected end of file, expected {what}"),
                    })
                }
                Some(l) => {
                    let l = l?;
                    if !l.trim().is_empty() {
                        return Ok((self.line, l.split_whitespace().map(String::from).collect()));
                    }
                }
            }
        }
    }
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot read {what} from `{field}`"),
    })
}

fn parse_row(line: usize, fields: &[String], expected: usize, what: &str) -> Result<Vec<f64>> {
    if fields.len() != expected {
        return Err(Error::Parse {
            line,
            message: format!("expected {expected} {what}, found {}", fields.len()),
        });
    }
    fields.iter().map(|f| parse_field(line, f, what)).collect()
}

pub fn read_problem(input: impl BufRead) -> Result<ProblemInstance> {
    let mut lines = Lines {
        inner: input.lines(),
        line: 0,
    };
    let (hl, header) = lines.next_fields("header")?;
    if header.len() != 7 {
        return Err(Error::Parse {
            line: hl,
            message: format!("header needs 7 fields `n m I J loss_kind reg_kind gamma`, found {}", header.len()),
        });
    }
    let n: usize = parse_field(hl, &header[0], "n")?;
    let m: usize = parse_field(hl, &header[1], "m")?;
    let num_batches: usize = parse_field(hl, &header[2], "I")?;
    let num_blocks: usize = parse_field(hl, &header[3], "J")?;
    let loss: LossKind = header[4].parse()?;
    let reg = parse_regularizer(&header[5], num_blocks)?;
    let gamma: f64 = parse_field(hl, &header[6], "gamma")?;

    let (sl, sizes) = lines.next_fields("block sizes")?;
    if sizes.len() != num_blocks {
        return Err(Error::Parse {
            line: sl,
            message: format!("expected {num_blocks} block sizes, found {}", sizes.len()),
        });
    }
    let sizes = sizes
        .iter()
        .map(|s| parse_field(sl, s, "block size"))
        .collect::<Result<Vec<usize>>>()?;
    let partition = BlockPartition::from_sizes(sizes)?;
    if partition.dim() != n {
        return Err(Error::Parse {
            line: sl,
            message: format!("block sizes sum to {}, header says n = {n}", partition.dim()),
        });
    }
    let (bl, b) = lines.next_fields("targets")?;
    let targets = Array1::from(parse_row(bl, &b, m, "targets")?);
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m {
        let (rl, row) = lines.next_fields("design row")?;
        data.extend(parse_row(rl, &row, n, "design entries")?);
    }
    let design = Array2::from_shape_vec((m, n), data).expect("m * n entries collected");
    ProblemInstance::new(
        design,
        targets,
        contiguous_batches(m, num_batches)?,
        loss,
        partition,
        reg,
        gamma,
    )
}

pub const TRACE_HEADER: [&str; 7] = ["seed", "t", "grad_evals", "eta", "objective", "subopt", "regret_partial"];

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write all records, grouped by trace in the order given.
pub fn write_trace_csv(traces: &[Trace], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER).map_err(csv_error)?;
    for trace in traces {
        for r in &trace.records {
            w.write_record([
                r.seed.to_string(),
                r.t.to_string(),
                fmt_float(r.grad_evals),
                fmt_float(r.eta),
                fmt_float(r.objective),
                fmt_float(r.subopt),
                fmt_float(r.regret_partial),
            ])
            .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a trace CSV back into per-seed traces (iterates are not stored).
pub fn read_trace_csv(input: impl std::io::Read) -> Result<Vec<Trace>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_error)?.clone();
    if headers.iter().ne(TRACE_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", TRACE_HEADER.join(",")),
        });
    }
    let mut traces: BTreeMap<u64, Vec<TraceRecord>> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let f = |k: usize| -> Result<f64> { parse_field(line, &rec[k], TRACE_HEADER[k]) };
        let seed: u64 = parse_field(line, &rec[0], "seed")?;
        let record = TraceRecord {
            seed,
            t: parse_field(line, &rec[1], "t")?,
            grad_evals: f(2)?,
            eta: f(3)?,
            objective: f(4)?,
            subopt: f(5)?,
            regret_partial: f(6)?,
        };
        traces.entry(seed).or_default().push(record);
    }
    Ok(traces
        .into_iter()
        .map(|(seed, records)| Trace {
            seed,
            online: records.iter().all(|r| !r.regret_partial.is_nan()),
            records,
            iterates: Vec::new(),
            max_grad_norm: f64::NAN,
        })
        .collect())
}

/// `key = value` lines, keys in sorted order.
pub fn write_summary(entries: &BTreeMap<String, String>, mut out: impl Write) -> Result<()> {
    for (k, v) in entries {
        writeln!(out, "{k} = {v}")?;
    }
    Ok(())
}

/// Parse `key = value` lines; blank lines and `#` comments are skipped.
pub fn read_key_values(input: impl BufRead) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::Parse {
            line: k + 1,
            message: format!("expected `key = value`, found `{trimmed}`"),
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
