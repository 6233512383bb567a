//! Versioned text checkpoint format for policies.
//!
//! Layout (whitespace-separated, one record per line):
//!
//! ```text
//! asv-mlp-checkpoint v1
//! hidden relu
//! output tanh
//! dims 80 300 300 4
//! layer 0 80 300
//! <80 weight rows, each with 300 hex-encoded f64 words>
//! bias <300 hex words>
//! ... remaining layers ...
//! end
//! ```
//!
//! Every value is the IEEE-754 bit pattern in lowercase hex, so a decode
//! reproduces the network bit-for-bit.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::mlp::{Activation, Layer, Mlp};
use crate::linalg::Mat;

pub const FORMAT_HEADER: &str = "asv-mlp-checkpoint";
pub const FORMAT_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CheckpointError {
    #[error("bad header: expected `{FORMAT_HEADER} {FORMAT_VERSION}`")]
    BadHeader,
    #[error("unsupported version `{0}`")]
    UnsupportedVersion(String),
    #[error("malformed checkpoint: {0}")]
    Malformed(&'static str),
    #[error("value is not valid hex-encoded f64: `{0}`")]
    BadValue(String),
}

fn activation_name(a: Activation) -> &'static str {
    match a {
        Activation::Relu => "relu",
        Activation::Tanh => "tanh",
        Activation::Identity => "identity",
    }
}

fn activation_from(name: &str) -> Result<Activation, CheckpointError> {
    match name {
        "relu" => Ok(Activation::Relu),
        "tanh" => Ok(Activation::Tanh),
        "identity" => Ok(Activation::Identity),
        _ => Err(CheckpointError::Malformed("unknown activation")),
    }
}

fn push_hex_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{:016x}", v.to_bits()));
    }
    out.push('\n');
}

pub fn encode_mlp(net: &Mlp) -> String {
    let dims = net.dims();
    let mut out = String::new();
    out.push_str(&format!("{FORMAT_HEADER} {FORMAT_VERSION}\n"));
    out.push_str(&format!("hidden {}\n", activation_name(net.hidden)));
    out.push_str(&format!("output {}\n", activation_name(net.output)));
    out.push_str("dims");
    for d in &dims {
        out.push_str(&format!(" {d}"));
    }
    out.push('\n');
    for (i, layer) in net.layers.iter().enumerate() {
        out.push_str(&format!("layer {i} {} {}\n", layer.w.rows(), layer.w.cols()));
        for r in 0..layer.w.rows() {
            push_hex_row(&mut out, layer.w.row(r));
        }
        out.push_str("bias ");
        push_hex_row(&mut out, &layer.b);
    }
    out.push_str("end\n");
    out
}

fn parse_hex(token: &str) -> Result<f64, CheckpointError> {
    let bits =
        u64::from_str_radix(token, 16).map_err(|_| CheckpointError::BadValue(token.into()))?;
    Ok(f64::from_bits(bits))
}

fn parse_row(line: &str, expected: usize) -> Result<Vec<f64>, CheckpointError> {
    let values: Result<Vec<f64>, _> = line.split_whitespace().map(parse_hex).collect();
    let values = values?;
    if values.len() != expected {
        return Err(CheckpointError::Malformed("row width mismatch"));
    }
    Ok(values)
}

pub fn decode_mlp(text: &str) -> Result<Mlp, CheckpointError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or(CheckpointError::BadHeader)?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(FORMAT_HEADER) {
        return Err(CheckpointError::BadHeader);
    }
    match parts.next() {
        Some(FORMAT_VERSION) => {}
        Some(v) => return Err(CheckpointError::UnsupportedVersion(v.into())),
        None => return Err(CheckpointError::BadHeader),
    }

    let mut expect_tagged = |tag: &'static str| -> Result<String, CheckpointError> {
        let line = lines
            .next()
            .ok_or(CheckpointError::Malformed("unexpected end of file"))?;
        let rest = line
            .strip_prefix(tag)
            .ok_or(CheckpointError::Malformed("missing section"))?;
        Ok(rest.trim().into())
    };

    let hidden = activation_from(&expect_tagged("hidden")?)?;
    let output = activation_from(&expect_tagged("output")?)?;
    let dims: Vec<usize> = expect_tagged("dims")?
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| CheckpointError::Malformed("bad dimension"))
        })
        .collect::<Result<_, _>>()?;
    if dims.len() < 2 {
        return Err(CheckpointError::Malformed("need at least two dims"));
    }

    let mut layers = Vec::with_capacity(dims.len() - 1);
    for i in 0..dims.len() - 1 {
        let decl = lines
            .next()
            .ok_or(CheckpointError::Malformed("missing layer"))?;
        let fields: Vec<&str> = decl.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "layer" {
            return Err(CheckpointError::Malformed("bad layer declaration"));
        }
        let idx: usize = fields[1]
            .parse()
            .map_err(|_| CheckpointError::Malformed("bad layer index"))?;
        let rows: usize = fields[2]
            .parse()
            .map_err(|_| CheckpointError::Malformed("bad layer rows"))?;
        let cols: usize = fields[3]
            .parse()
            .map_err(|_| CheckpointError::Malformed("bad layer cols"))?;
        if idx != i || rows != dims[i] || cols != dims[i + 1] {
            return Err(CheckpointError::Malformed("layer shape disagrees with dims"));
        }
        let mut w = Mat::zeros(rows, cols);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or(CheckpointError::Malformed("missing weight row"))?;
            w.set_row(r, &parse_row(line, cols)?);
        }
        let bias_line = lines
            .next()
            .ok_or(CheckpointError::Malformed("missing bias"))?;
        let rest = bias_line
            .strip_prefix("bias")
            .ok_or(CheckpointError::Malformed("missing bias tag"))?;
        let b = parse_row(rest.trim(), cols)?;
        layers.push(Layer { w, b });
    }

    match lines.next() {
        Some("end") => {}
        _ => return Err(CheckpointError::Malformed("missing end marker")),
    }

    Ok(Mlp {
        layers,
        hidden,
        output,
    })
}
