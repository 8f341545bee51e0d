//! Line-oriented text trace format.
//!
//! One micro-op per line, whitespace-separated tokens, `#` starts a comment:
//!
//! ```text
//! L pc=<hex> dst=r<n> asrc=[r<n>,...] addr=<hex> sz=<n>
//! S pc=<hex> asrc=[r<n>,...] dsrc=[r<n>,...] addr=<hex> sz=<n>
//! A pc=<hex> dst=r<n> src=[r<n>,...] lat=<n> [fp]
//! B pc=<hex> src=[r<n>,...] [mispred]
//! N pc=<hex>
//! ```
//!
//! Register lists may be written with or without brackets (`asrc=r2,r3`,
//! `asrc=[r2,r3]`, `asrc=`). The formatter emits the unbracketed form. An
//! optional `# slicesim-trace name=.. body=.. iters=..` line carries the
//! loop metadata of generated traces.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{MemRef, MicroOp, OpKind, Reg, RegSet, Trace, TraceMeta};

const META_TAG: &str = "slicesim-trace";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

fn err(line: usize, reason: impl Into<String>) -> TraceError {
    TraceError::Parse {
        line,
        reason: reason.into(),
    }
}

/// Parses trace text into program-ordered micro-ops; `seq` follows line order.
pub fn parse_trace(text: &str) -> Result<Vec<MicroOp>, TraceError> {
    parse_trace_with_meta(text).map(|t| t.ops)
}

/// Like [`parse_trace`], also recovering the loop metadata header when present.
pub fn parse_trace_with_meta(text: &str) -> Result<Trace, TraceError> {
    let mut ops = Vec::new();
    let mut meta = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let (body, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
            None => (raw, None),
        };
        if let Some(comment) = comment {
            if let Some(rest) = comment.trim().strip_prefix(META_TAG) {
                meta = Some(parse_meta(rest, lineno)?);
            }
        }
        if body.trim().is_empty() {
            continue;
        }
        let mut op = parse_line(body, lineno)?;
        op.seq = ops.len() as u64;
        ops.push(op);
    }
    let meta = meta.unwrap_or(TraceMeta {
        name: String::new(),
        loop_body_len: ops.len(),
        iterations: 1,
    });
    Ok(Trace { meta, ops })
}

fn parse_meta(rest: &str, line: usize) -> Result<TraceMeta, TraceError> {
    let mut meta = TraceMeta {
        name: String::new(),
        loop_body_len: 0,
        iterations: 1,
    };
    for tok in rest.split_whitespace() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| err(line, format!("bad metadata token `{tok}`")))?;
        match key {
            "name" => meta.name = value.to_string(),
            "body" => meta.loop_body_len = parse_dec(value, line)?,
            "iters" => meta.iterations = parse_dec(value, line)?,
            _ => return Err(err(line, format!("unknown metadata key `{key}`"))),
        }
    }
    Ok(meta)
}

fn parse_line(body: &str, line: usize) -> Result<MicroOp, TraceError> {
    let mut tokens = body.split_whitespace();
    let opcode = tokens.next().ok_or_else(|| err(line, "empty line"))?;
    let (kind_letter, allowed, flags): (char, &[&str], &[&str]) = match opcode {
        "L" => ('L', &["pc", "dst", "asrc", "addr", "sz"], &[]),
        "S" => ('S', &["pc", "asrc", "dsrc", "addr", "sz"], &[]),
        "A" => ('A', &["pc", "dst", "src", "lat"], &["fp"]),
        "B" => ('B', &["pc", "src"], &["mispred"]),
        "N" => ('N', &["pc"], &[]),
        other => return Err(err(line, format!("unknown opcode `{other}`"))),
    };

    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    let mut set_flags: Vec<&str> = Vec::new();
    for tok in tokens {
        match tok.split_once('=') {
            Some((key, value)) => {
                if !allowed.contains(&key) {
                    return Err(err(line, format!("unexpected field `{key}` for `{opcode}`")));
                }
                if fields.insert(key, value).is_some() {
                    let what = if key == "dst" {
                        "duplicate dst registers".to_string()
                    } else {
                        format!("duplicate field `{key}`")
                    };
                    return Err(err(line, what));
                }
            }
            None => {
                if !flags.contains(&tok) {
                    return Err(err(line, format!("unexpected token `{tok}`")));
                }
                if set_flags.contains(&tok) {
                    return Err(err(line, format!("duplicate flag `{tok}`")));
                }
                set_flags.push(tok);
            }
        }
    }

    let pc = parse_hex(fields.get("pc").ok_or_else(|| err(line, "missing pc="))?, line)?;
    let regs = |key: &str| -> Result<RegSet, TraceError> {
        fields
            .get(key)
            .map(|v| parse_reg_list(v, line))
            .unwrap_or(Ok(RegSet::EMPTY))
    };
    let dst = |required: bool| -> Result<Option<Reg>, TraceError> {
        match fields.get("dst") {
            Some(v) => {
                let set = parse_reg_list(v, line)?;
                if value_count(v) > 1 {
                    return Err(err(line, "duplicate dst registers"));
                }
                Ok(set.iter().next())
            }
            None if required => Err(err(line, "missing dst=")),
            None => Ok(None),
        }
    };
    let mem = || -> Result<MemRef, TraceError> {
        let addr = fields.get("addr").ok_or_else(|| err(line, "memory op without addr="))?;
        let addr = parse_hex(addr, line)?;
        let size = match fields.get("sz") {
            Some(v) => parse_dec::<u8>(v, line)?,
            None => 8,
        };
        if !matches!(size, 1 | 2 | 4 | 8) {
            return Err(err(line, format!("sz={size} not in {{1,2,4,8}}")));
        }
        Ok(MemRef { addr, size })
    };

    let op = match kind_letter {
        'L' => {
            let dst = dst(true)?.ok_or_else(|| err(line, "load needs one dst register"))?;
            let m = mem()?;
            MicroOp::load(pc, dst, regs("asrc")?, m.addr, m.size)
        }
        'S' => {
            let m = mem()?;
            MicroOp::store(pc, regs("asrc")?, regs("dsrc")?, m.addr, m.size)
        }
        'A' => {
            let dst = dst(true)?.ok_or_else(|| err(line, "ALU op needs one dst register"))?;
            let src = regs("src")?;
            let mut op = if set_flags.contains(&"fp") {
                MicroOp::fp(pc, dst, src)
            } else {
                MicroOp::alu(pc, dst, src)
            };
            if let Some(lat) = fields.get("lat") {
                let lat: u32 = parse_dec(lat, line)?;
                if lat == 0 {
                    return Err(err(line, "lat must be at least 1"));
                }
                op.exec_latency = lat;
            }
            op
        }
        'B' => MicroOp::branch(pc, regs("src")?, set_flags.contains(&"mispred")),
        _ => MicroOp::nop(pc),
    };
    if op.src.len() > 3 {
        return Err(err(line, "more than 3 source registers"));
    }
    Ok(op)
}

fn value_count(list: &str) -> usize {
    list.trim_matches(|c| c == '[' || c == ']')
        .split(',')
        .filter(|s| !s.is_empty())
        .count()
}

fn parse_reg_list(list: &str, line: usize) -> Result<RegSet, TraceError> {
    let inner = list
        .strip_prefix('[')
        .map(|s| s.strip_suffix(']').ok_or_else(|| err(line, "unclosed `[`")))
        .transpose()?
        .unwrap_or(list);
    let mut set = RegSet::EMPTY;
    for name in inner.split(',').filter(|s| !s.is_empty()) {
        let id = name
            .strip_prefix('r')
            .and_then(|n| n.parse::<u8>().ok())
            .and_then(Reg::new)
            .ok_or_else(|| err(line, format!("bad register `{name}`")))?;
        set.insert(id);
    }
    Ok(set)
}

fn parse_hex(value: &str, line: usize) -> Result<u64, TraceError> {
    let digits = value
        .strip_prefix("0x")
        .or_else(|| value.strip_prefix("0X"))
        .unwrap_or(value);
    u64::from_str_radix(digits, 16).map_err(|_| err(line, format!("bad hex value `{value}`")))
}

fn parse_dec<T: std::str::FromStr>(value: &str, line: usize) -> Result<T, TraceError> {
    value.parse().map_err(|_| err(line, format!("bad number `{value}`")))
}

fn write_regs(out: &mut String, key: &str, set: RegSet) {
    let _ = write!(out, " {key}=");
    for (i, reg) in set.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{reg}");
    }
}

/// Formats a single op as one trace line (no newline).
pub fn format_op(op: &MicroOp) -> String {
    let mut out = String::new();
    match op.kind {
        OpKind::Load => {
            let m = op.mem.expect("load without address");
            let _ = write!(out, "L pc={:#x}", op.pc);
            let _ = write!(out, " dst={}", op.dst.expect("load without dst"));
            write_regs(&mut out, "asrc", op.addr_src);
            let _ = write!(out, " addr={:#x} sz={}", m.addr, m.size);
        }
        OpKind::Store => {
            let m = op.mem.expect("store without address");
            let _ = write!(out, "S pc={:#x}", op.pc);
            write_regs(&mut out, "asrc", op.addr_src);
            write_regs(&mut out, "dsrc", op.data_src());
            let _ = write!(out, " addr={:#x} sz={}", m.addr, m.size);
        }
        OpKind::AluInt | OpKind::AluFp => {
            let _ = write!(out, "A pc={:#x}", op.pc);
            let _ = write!(out, " dst={}", op.dst.expect("ALU op without dst"));
            write_regs(&mut out, "src", op.src);
            let _ = write!(out, " lat={}", op.exec_latency);
            if op.kind == OpKind::AluFp {
                out.push_str(" fp");
            }
        }
        OpKind::Branch => {
            let _ = write!(out, "B pc={:#x}", op.pc);
            write_regs(&mut out, "src", op.src);
            if op.mispredict {
                out.push_str(" mispred");
            }
        }
        OpKind::Nop => {
            let _ = write!(out, "N pc={:#x}", op.pc);
        }
    }
    out
}

/// Formats a whole trace, including the metadata header line.
pub fn format_trace(trace: &Trace) -> String {
    let mut out = String::with_capacity(trace.ops.len() * 40 + 64);
    let meta = &trace.meta;
    let _ = writeln!(
        out,
        "# {META_TAG} name={} body={} iters={}",
        meta.name, meta.loop_body_len, meta.iterations
    );
    for op in &trace.ops {
        out.push_str(&format_op(op));
        out.push('\n');
    }
    out
}
